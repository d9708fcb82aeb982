"""
Zone model: CERT entries, serial handling and master-file output
"""
import logging
import struct
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Tuple

from codec.cert_rdata import CertRecordData, format_cert_presentation
from codec.names import DomainName
from codec.wire import ResourceRecord
from config.record_types import CLASS_IN, TYPE_NS, TYPE_SOA
from config.settings import (
    DEFAULT_TTL,
    HOSTMASTER,
    INITIAL_SERIAL,
    PRIMARY_NS,
    SOA_EXPIRE,
    SOA_MINIMUM,
    SOA_REFRESH,
    SOA_RETRY,
)

logger = logging.getLogger(__name__)

MAX_SERIAL = 0xFFFFFFFF


class ZoneError(ValueError):
    pass


class NotFoundError(ZoneError):
    """Nothing in the zone matches a removal request"""


@dataclass(frozen=True)
class ZoneEntry:
    """One published certificate"""
    owner: DomainName
    ttl: int
    record: CertRecordData

    def __post_init__(self):
        if self.ttl <= 0:
            raise ZoneError(f"TTL must be positive, got {self.ttl}")

    def sort_key(self) -> tuple:
        return self.owner.sort_key(), self.record.key_tag, self.record.cert_type

    def matches(self, other: 'ZoneEntry') -> bool:
        """Same owner, key tag and certificate type: a re-issue of the same slot"""
        return (
            self.owner == other.owner
            and self.record.key_tag == other.record.key_tag
            and self.record.cert_type == other.record.cert_type
        )

    def to_resource_record(self, owner: Optional[DomainName] = None) -> ResourceRecord:
        return ResourceRecord.cert(owner or self.owner, self.ttl, self.record)

    def presentation(self) -> str:
        return format_cert_presentation(self.owner, self.ttl, self.record, absolute=True)


@dataclass(frozen=True)
class Zone:
    """Serial-numbered collection of CERT entries plus SOA/NS boilerplate"""
    origin: DomainName
    primary_ns: DomainName
    hostmaster: DomainName
    serial: int = INITIAL_SERIAL
    default_ttl: int = DEFAULT_TTL
    refresh: int = SOA_REFRESH
    retry: int = SOA_RETRY
    expire: int = SOA_EXPIRE
    minimum: int = SOA_MINIMUM
    entries: Tuple[ZoneEntry, ...] = ()

    @classmethod
    def create(cls, origin: DomainName, default_ttl: int = DEFAULT_TTL,
               serial: int = INITIAL_SERIAL) -> 'Zone':
        """
        New empty zone with the configured NS host and hostmaster mailbox

        Args:
            origin: Zone apex
            default_ttl: $TTL and SOA/NS TTL
            serial: Starting serial

        Returns:
            Zone
        """
        return cls(
            origin=origin,
            primary_ns=DomainName.from_labels([PRIMARY_NS, *origin.labels]),
            hostmaster=DomainName.from_labels([HOSTMASTER, *origin.labels]),
            serial=serial,
            default_ttl=default_ttl,
        )

    def contains(self, name: DomainName) -> bool:
        return name.is_subdomain_of(self.origin)

    def entries_at(self, owner: DomainName) -> List[ZoneEntry]:
        return [entry for entry in self.entries if entry.owner == owner]

    def sorted_entries(self) -> List[ZoneEntry]:
        return sorted(self.entries, key=ZoneEntry.sort_key)

    def soa_record(self) -> ResourceRecord:
        rdata = (
            self.primary_ns.to_wire()
            + self.hostmaster.to_wire()
            + struct.pack('!IIIII', self.serial, self.refresh, self.retry, self.expire, self.minimum)
        )
        return ResourceRecord(self.origin, self.default_ttl, CLASS_IN, TYPE_SOA, rdata)

    def ns_record(self) -> ResourceRecord:
        return ResourceRecord(self.origin, self.default_ttl, CLASS_IN, TYPE_NS, self.primary_ns.to_wire())


class RemovalResult(NamedTuple):
    zone: Zone
    removed: int


def next_serial(serial: int) -> int:
    # wraps from 2^32-1 back to 1
    return serial % MAX_SERIAL + 1


def upsert(zone: Zone, entry: ZoneEntry) -> Zone:
    """
    Add an entry, replacing one with the same owner, key tag and type

    Args:
        zone: Current zone
        entry: Entry to publish

    Returns:
        New zone with the serial incremented
    """
    kept = [existing for existing in zone.entries if not existing.matches(entry)]
    if len(kept) != len(zone.entries):
        logger.info(f"Replacing {entry.owner} key tag {entry.record.key_tag} (re-issue)")
    return replace(zone, entries=tuple(kept) + (entry,), serial=next_serial(zone.serial))


def remove(zone: Zone, owner: DomainName, key_tag: Optional[int] = None) -> RemovalResult:
    """
    Delete the entries at owner, or only the one with key_tag

    Args:
        zone: Current zone
        owner: Owner name to unpublish
        key_tag: Restrict the removal to this key tag

    Returns:
        RemovalResult with the new zone and the number of entries removed
    """
    def doomed(entry: ZoneEntry) -> bool:
        return entry.owner == owner and (key_tag is None or entry.record.key_tag == key_tag)

    kept = tuple(entry for entry in zone.entries if not doomed(entry))
    removed = len(zone.entries) - len(kept)
    if not removed:
        suffix = f" with key tag {key_tag}" if key_tag is not None else ''
        raise NotFoundError(f"no entry at {owner}{suffix}")
    return RemovalResult(replace(zone, entries=kept, serial=next_serial(zone.serial)), removed)


def emit_zone_file(zone: Zone) -> str:
    """
    Render the zone as master-file text

    Layout: $ORIGIN, $TTL, SOA, NS, then one CERT block per entry in
    (owner, key tag) order. Equal zones render to identical text.

    Args:
        zone: Zone to render

    Returns:
        Master-file text
    """
    origin = zone.origin.to_text(absolute=True)
    ttl = zone.default_ttl
    lines = [
        f"$ORIGIN {origin}",
        f"$TTL {ttl}",
        f"{origin} {ttl} IN SOA {zone.primary_ns.to_text(absolute=True)} "
        f"{zone.hostmaster.to_text(absolute=True)} (",
        f"\t{zone.serial} ; serial",
        f"\t{zone.refresh} ; refresh",
        f"\t{zone.retry} ; retry",
        f"\t{zone.expire} ; expire",
        f"\t{zone.minimum} ) ; minimum",
        f"{origin} {ttl} IN NS {zone.primary_ns.to_text(absolute=True)}",
    ]
    lines.extend(entry.presentation() for entry in zone.sorted_entries())
    return '\n'.join(lines) + '\n'
