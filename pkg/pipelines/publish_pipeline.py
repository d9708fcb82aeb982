"""
Certificate publishing workflow
Certificate in -> owner name and CERT record -> zone update -> atomic zone file rewrite
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import logging
import tempfile
from typing import List, Optional, Sequence

from cryptography import x509
from cryptography.hazmat.primitives.serialization import Encoding

from codec.names import DomainName
from config.settings import DEFAULT_TTL, ORIGIN
from publisher.entry_builder import PublishProfile, build_entry
from publisher.zone import Zone, ZoneEntry, ZoneError, emit_zone_file, remove, upsert
from publisher.zone_parser import read_zone_file

logger = logging.getLogger(__name__)

PEM_MARKER = b'-----BEGIN'


class OutOfZoneError(ZoneError):
    """Owner name falls outside the zone being edited"""


def load_certificate(path: str) -> bytes:
    """
    Read a certificate file, PEM or DER

    Args:
        path: Certificate file

    Returns:
        DER octets
    """
    with open(path, 'rb') as f:
        data = f.read()
    if data.lstrip().startswith(PEM_MARKER):
        return x509.load_pem_x509_certificate(data).public_bytes(Encoding.DER)
    return data


def load_zone(zone_path: str, origin: Optional[str] = None, default_ttl: int = DEFAULT_TTL) -> Zone:
    """Existing zone file, or a new empty zone when the file does not exist yet"""
    if os.path.exists(zone_path):
        return read_zone_file(zone_path)
    apex = DomainName.from_text(origin or ORIGIN)
    logger.info(f"{zone_path} does not exist, starting zone {apex}")
    return Zone.create(apex, default_ttl=default_ttl)


def write_zone_atomically(zone: Zone, zone_path: str) -> None:
    """
    Replace the zone file in one rename so readers never see a partial file

    Args:
        zone: Zone to write
        zone_path: Destination
    """
    directory = os.path.dirname(os.path.abspath(zone_path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix='.certdns-', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='ascii', newline='\n') as f:
            f.write(emit_zone_file(zone))
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, zone_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    logger.info(f"Wrote {zone_path} serial {zone.serial} ({len(zone.entries)} certificates)")


def publish(cert_ders: Sequence[bytes], zone_path: str, ttl: int = DEFAULT_TTL,
            profile: PublishProfile = PublishProfile(), origin: Optional[str] = None) -> List[ZoneEntry]:
    """
    Publish certificates into a zone file

    All certificates are checked before anything is written; one failure
    leaves the zone file untouched.

    Args:
        cert_ders: DER certificates
        zone_path: Zone file, created when missing
        ttl: CERT record TTL
        profile: Naming profile and deny list
        origin: Apex for a newly created zone

    Returns:
        The published entries
    """
    zone = load_zone(zone_path, origin)
    entries = []
    for cert_der in cert_ders:
        entry = build_entry(cert_der, ttl, profile)
        if not zone.contains(entry.owner):
            raise OutOfZoneError(f"{entry.owner} is outside the zone {zone.origin}")
        zone = upsert(zone, entry)
        entries.append(entry)
        logger.info(f"Published {entry.owner} key tag {entry.record.key_tag} "
                    f"({len(entry.record.payload)} octets)")
    write_zone_atomically(zone, zone_path)
    return entries


def unpublish(zone_path: str, owner: DomainName, key_tag: Optional[int] = None) -> int:
    """
    Remove certificates from a zone file

    Args:
        zone_path: Existing zone file
        owner: Owner name
        key_tag: Only this key tag

    Returns:
        Number of entries removed
    """
    result = remove(read_zone_file(zone_path), owner, key_tag)
    write_zone_atomically(result.zone, zone_path)
    logger.info(f"Removed {result.removed} certificate(s) at {owner}")
    return result.removed
