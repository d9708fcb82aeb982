"""
Certificate lookup client: owner name construction, CERT query, UDP -> TCP fallback
"""
import logging
import os
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from client.exceptions import LookupTimeoutError, MalformedResponseError, NotFoundError, ResolverError
from client.transport import SocketTransport, Transport
from codec.cert_rdata import CertRecordData
from codec.exceptions import WireFormatError
from codec.names import DomainName
from codec.wire import DnsMessage, build_query, decode_message, encode_message
from config.record_types import (
    CLASSIC_UDP_LIMIT,
    RCODE_NAMES,
    RCODE_NOERROR,
    RCODE_NXDOMAIN,
    TYPE_CERT,
)
from config.settings import EDNS_PAYLOAD, QUERY_TIMEOUT, UDP_RETRIES
from naming.rules import translate_email

logger = logging.getLogger(__name__)


class TargetKind(Enum):
    EMAIL = 'email'
    HOST = 'host'
    RAW_NAME = 'raw'


class TransportPolicy(Enum):
    UDP_THEN_TCP = 'udp'
    TCP_ONLY = 'tcp'


class TransportUsed(Enum):
    UDP = 'udp'
    TCP = 'tcp'


@dataclass(frozen=True)
class LookupTarget:
    kind: TargetKind
    value: str

    @classmethod
    def email(cls, addr: str) -> 'LookupTarget':
        return cls(TargetKind.EMAIL, addr)

    @classmethod
    def host(cls, name: str) -> 'LookupTarget':
        return cls(TargetKind.HOST, name)

    @classmethod
    def raw(cls, name: str) -> 'LookupTarget':
        return cls(TargetKind.RAW_NAME, name)

    @classmethod
    def parse(cls, text: str) -> 'LookupTarget':
        """'user@domain' is an e-mail target, anything else a host name"""
        return cls.email(text) if '@' in text else cls.host(text)


def resolve_target(target: LookupTarget) -> DomainName:
    """
    Owner name to query for a target

    Args:
        target: E-mail address, host name or raw owner name

    Returns:
        DomainName
    """
    if target.kind is TargetKind.EMAIL:
        return translate_email(target.value)
    return DomainName.from_text(target.value)


@dataclass(frozen=True)
class LookupRequest:
    target: LookupTarget
    server: Tuple[str, int]
    edns_payload: Optional[int] = EDNS_PAYLOAD
    transport_policy: TransportPolicy = TransportPolicy.UDP_THEN_TCP
    key_tag: Optional[int] = None
    cert_type: Optional[int] = None
    timeout: float = QUERY_TIMEOUT
    udp_retries: int = UDP_RETRIES

    def __post_init__(self):
        if self.edns_payload is not None and not CLASSIC_UDP_LIMIT <= self.edns_payload <= 0xFFFF:
            raise ValueError(f"EDNS payload must be in 512-65535, got {self.edns_payload}")
        if self.udp_retries < 0:
            raise ValueError("udp_retries must not be negative")


@dataclass
class LookupResult:
    owner: DomainName
    records: List[CertRecordData] = field(default_factory=list)
    transport_used: TransportUsed = TransportUsed.UDP
    retried_over_tcp: bool = False
    message_size: int = 0


class ResolverClient:
    """
    One in-flight lookup at a time over a pluggable transport

    Args:
        transport: Defaults to real sockets
        rng: Source of query ids; defaults to the OS entropy pool
    """

    def __init__(self, transport: Optional[Transport] = None, rng: Optional[random.Random] = None):
        self.transport = transport or SocketTransport()
        self.rng = rng or random.SystemRandom()

    def _matches(self, data: bytes, query: DnsMessage) -> bool:
        try:
            response = decode_message(data)
        except WireFormatError as e:
            logger.warning(f"Discarding undecodable response: {e}")
            return False
        if response.id != query.id or not response.flags.qr:
            logger.warning(f"Discarding response with id {response.id}, expected {query.id}")
            return False
        if response.question is not None and response.question.name != query.question.name:
            logger.warning(f"Discarding response for {response.question.name}, asked {query.question.name}")
            return False
        return True

    def _udp(self, wire: bytes, query: DnsMessage, req: LookupRequest) -> bytes:
        retrying = Retrying(
            stop=stop_after_attempt(req.udp_retries + 1),
            retry=retry_if_exception_type(LookupTimeoutError),
            before_sleep=before_sleep_log(logger, logging.WARNING),
            reraise=True,
        )
        return retrying(
            self.transport.udp_exchange, wire, req.server, req.timeout,
            lambda data: self._matches(data, query),
        )

    def _tcp(self, wire: bytes, query: DnsMessage, req: LookupRequest) -> bytes:
        data = self.transport.tcp_exchange(wire, req.server, req.timeout)
        if not self._matches(data, query):
            raise MalformedResponseError("TCP response does not match the query")
        return data

    def lookup(self, req: LookupRequest) -> LookupResult:
        """
        Query the configured server for the target's CERT records

        Args:
            req: Target, server and transport options

        Returns:
            LookupResult with the decoded records, after key tag / type filtering
        """
        owner = resolve_target(req.target)
        query = build_query(owner, TYPE_CERT, self.rng.randrange(0x10000), edns_payload=req.edns_payload)
        wire = encode_message(query)

        retried = False
        if req.transport_policy is TransportPolicy.TCP_ONLY:
            data = self._tcp(wire, query, req)
            used = TransportUsed.TCP
        else:
            data = self._udp(wire, query, req)
            used = TransportUsed.UDP
            if decode_message(data).flags.tc:
                logger.info(f"Truncated UDP answer for {owner} ({len(data)} octets), retrying over TCP")
                data = self._tcp(wire, query, req)
                used = TransportUsed.TCP
                retried = True

        response = decode_message(data)
        rcode = response.flags.rcode
        if rcode == RCODE_NXDOMAIN:
            raise NotFoundError(NotFoundError.NXDOMAIN, owner.to_text())
        if rcode != RCODE_NOERROR:
            raise ResolverError(f"{owner}: server answered {RCODE_NAMES.get(rcode, rcode)}")

        try:
            records = [
                record.cert_data() for record in response.answers
                if record.rr_type == TYPE_CERT and record.owner == owner
            ]
        except WireFormatError as e:
            raise MalformedResponseError(f"bad CERT rdata for {owner}: {e}")
        if req.key_tag is not None:
            records = [record for record in records if record.key_tag == req.key_tag]
        if req.cert_type is not None:
            records = [record for record in records if record.cert_type == req.cert_type]
        if not records:
            raise NotFoundError(NotFoundError.NODATA, owner.to_text())

        logger.debug(f"{owner}: {len(records)} certificates via {used.value} ({len(data)} octets)")
        return LookupResult(owner, records, used, retried, len(data))

    def fetch_certificate(self, target: str, server: Tuple[str, int], out_dir: Optional[str] = None,
                          **options) -> List[bytes]:
        """
        Resolve an e-mail address or host name and return the certificates

        Args:
            target: 'user@domain' or a host name
            server: Repository server address
            out_dir: When given, write each certificate to <owner>.<keytag>.cer there
            **options: Further LookupRequest fields

        Returns:
            DER certificates in answer order
        """
        result = self.lookup(LookupRequest(LookupTarget.parse(target), server, **options))
        if out_dir is not None:
            save_certificates(result, out_dir)
        return [record.payload for record in result.records]


def save_certificates(result: LookupResult, out_dir: str) -> List[str]:
    """
    Write each retrieved certificate to <out_dir>/<owner>.<keytag>.cer

    Args:
        result: Lookup result
        out_dir: Target directory, created when missing

    Returns:
        Paths written
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for record in result.records:
        path = os.path.join(out_dir, f"{result.owner}.{record.key_tag}.cer")
        with open(path, 'wb') as f:
            f.write(record.payload)
        logger.info(f"Saved {path} ({len(record.payload)} octets)")
        paths.append(path)
    return paths


def lookup(req: LookupRequest) -> LookupResult:
    return ResolverClient().lookup(req)


def fetch_certificate(target: str, server: Tuple[str, int], out_dir: Optional[str] = None,
                      **options) -> List[bytes]:
    return ResolverClient().fetch_certificate(target, server, out_dir, **options)
