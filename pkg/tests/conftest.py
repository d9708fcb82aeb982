import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from helpers import PERSONAL, REPOSITORY, SERVER, build_certificate, fixture_path, load_fixture  # noqa: E402

from codec.names import DomainName  # noqa: E402
from pipelines.publish_pipeline import write_zone_atomically  # noqa: E402
from publisher.entry_builder import build_entry  # noqa: E402
from publisher.zone import Zone, upsert  # noqa: E402
from server.repo_server import RepoServer, ServerConfig  # noqa: E402


def pytest_addoption(parser):
    parser.addoption('--update-golden', action='store_true', default=False,
                     help='Rewrite tests/fixtures/golden_zone.db from the certificate fixtures')


@pytest.fixture
def update_golden(request) -> bool:
    return request.config.getoption('--update-golden')


@pytest.fixture
def rng():
    return np.random.default_rng(20260105)


@pytest.fixture(scope='session')
def server_der() -> bytes:
    return load_fixture(SERVER['file'])


@pytest.fixture(scope='session')
def personal_der() -> bytes:
    return load_fixture(PERSONAL['file'])


@pytest.fixture(scope='session')
def repository_der() -> bytes:
    return load_fixture(REPOSITORY['file'])


@pytest.fixture
def cert_factory():
    return build_certificate


@pytest.fixture
def origin() -> DomainName:
    return DomainName.from_text('polito.it')


@pytest.fixture
def fixture_zone(origin, server_der, personal_der, repository_der) -> Zone:
    """The three fixture certificates, published in file order"""
    zone = Zone.create(origin)
    for cert in (server_der, personal_der, repository_der):
        zone = upsert(zone, build_entry(cert))
    return zone


@pytest.fixture
def zone_file(tmp_path, fixture_zone) -> str:
    path = str(tmp_path / 'polito.it.db')
    write_zone_atomically(fixture_zone, path)
    return path


@pytest.fixture
def repo_server(zone_file):
    """Loopback server on an ephemeral port, fast zone polling"""
    config = ServerConfig('127.0.0.1', 0, zone_file, max_udp_payload=4096, reload_interval=0.1)
    with RepoServer(config) as server:
        yield server


@pytest.fixture
def golden_path() -> str:
    return fixture_path('golden_zone.db')
