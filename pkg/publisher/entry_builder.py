"""
Certificate -> ZoneEntry: naming, key tag, algorithm and the size report
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional

from codec.cert_rdata import CERT_HEADER, CertRecordData
from codec.keytag import compute_keytag
from codec.names import DomainName
from codec.wire import HEADER_SIZE, QUESTION_TAIL, RR_HEADER
from config.record_types import (
    ALGORITHM_NONE,
    CERT_TYPE_PKIX,
    CLASSIC_UDP_LIMIT,
    EDNS_MAX_PAYLOAD,
    ETHERNET_TCP_PAYLOAD,
    ETHERNET_UDP_PAYLOAD,
    SIGNATURE_ALGORITHMS,
)
from config.settings import DEFAULT_TTL
from identity.cert_identity import extract_identity
from naming.rules import NamingDecision, NamingProfile, map_identity, translate_email
from publisher.zone import ZoneEntry

logger = logging.getLogger(__name__)

POINTER_SIZE = 2
OPT_RECORD_SIZE = 11  # root owner + type, class, ttl, rdlength


class PrivacyOptOutError(ValueError):
    """The subject asked not to be published"""


@dataclass(frozen=True)
class PublishProfile:
    """How certificates are named and which owners must never be published"""
    naming: NamingProfile = NamingProfile.GENERIC
    deny_list: FrozenSet[DomainName] = field(default_factory=frozenset)

    @classmethod
    def from_settings(cls, profile: str, deny_list_path: Optional[str] = None) -> 'PublishProfile':
        deny_list = load_deny_list(deny_list_path) if deny_list_path else frozenset()
        return cls(NamingProfile(profile.lower()), deny_list)


def parse_deny_list(lines: Iterable[str]) -> FrozenSet[DomainName]:
    """
    One owner name or e-mail address per line, '#' starts a comment

    Args:
        lines: Deny-list text lines

    Returns:
        Set of owner names that must not be published
    """
    owners = set()
    for line in lines:
        entry = line.split('#', 1)[0].strip()
        if not entry:
            continue
        owners.add(translate_email(entry) if '@' in entry else DomainName.from_text(entry.lower()))
    return frozenset(owners)


def load_deny_list(path: str) -> FrozenSet[DomainName]:
    with open(path, 'r', encoding='utf-8') as f:
        owners = parse_deny_list(f)
    logger.info(f"Loaded {len(owners)} privacy opt-outs from {path}")
    return owners


def signature_algorithm_number(oid: str) -> int:
    """CERT algorithm field for a certificate signature OID, 0 when unlisted"""
    return SIGNATURE_ALGORITHMS.get(oid, ALGORITHM_NONE)


def decide_owner(cert_der: bytes, profile: PublishProfile = PublishProfile()) -> NamingDecision:
    return map_identity(extract_identity(cert_der), profile.naming)


def build_entry(cert_der: bytes, ttl: int = DEFAULT_TTL,
                profile: PublishProfile = PublishProfile()) -> ZoneEntry:
    """
    Turn a DER certificate into the CERT entry that publishes it

    Args:
        cert_der: DER-encoded X.509 certificate
        ttl: Record TTL in seconds
        profile: Naming profile and deny list

    Returns:
        ZoneEntry with a PKIX record carrying the certificate verbatim
    """
    cert_der = bytes(cert_der)
    identity = extract_identity(cert_der)
    decision = map_identity(identity, profile.naming)
    if decision.owner in profile.deny_list:
        raise PrivacyOptOutError(f"{decision.owner} opted out of publication")

    record = CertRecordData(
        cert_type=CERT_TYPE_PKIX,
        key_tag=compute_keytag(identity.spki_der),
        algorithm=signature_algorithm_number(identity.signature_algorithm),
        payload=cert_der,
    )
    logger.debug(f"{decision.describe()} key tag {record.key_tag} algorithm {record.algorithm_text}")
    return ZoneEntry(decision.owner, ttl, record)


def response_size(owner: DomainName, record: CertRecordData, edns: bool = True) -> int:
    """
    Octets of the UDP response carrying one CERT record for owner

    Header, question, the answer with its owner compressed to a pointer and,
    when edns is set, the echoed OPT record.
    """
    question = owner.wire_length + QUESTION_TAIL.size
    answer = POINTER_SIZE + RR_HEADER.size + CERT_HEADER.size + len(record.payload)
    return HEADER_SIZE + question + answer + (OPT_RECORD_SIZE if edns else 0)


def transport_report(entry: ZoneEntry) -> Dict[str, object]:
    """
    Which transport limits a published certificate fits into

    Args:
        entry: Zone entry

    Returns:
        Sizes and one flag per limit
    """
    plain = response_size(entry.owner, entry.record, edns=False)
    with_edns = response_size(entry.owner, entry.record, edns=True)
    return {
        'owner': entry.owner.to_text(),
        'key_tag': entry.record.key_tag,
        'der_size': len(entry.record.payload),
        'rdata_size': CERT_HEADER.size + len(entry.record.payload),
        'response_size': with_edns,
        'fits_classic_udp': plain <= CLASSIC_UDP_LIMIT,
        'fits_ethernet_udp': with_edns <= ETHERNET_UDP_PAYLOAD,
        'fits_ethernet_tcp': plain + 2 <= ETHERNET_TCP_PAYLOAD,
        'fits_edns': with_edns <= EDNS_MAX_PAYLOAD,
    }
