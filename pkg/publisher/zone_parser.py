"""
Master-file reader for zones written by emit_zone_file (and hand edits of them)

Understands $ORIGIN, $TTL, '@', relative owners, blank owners, ';' comments,
parenthesised continuation lines and either order of the TTL and CLASS fields.
Only SOA, NS and CERT records are kept; other types are skipped with a warning.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from codec.cert_rdata import parse_cert_presentation
from codec.exceptions import WireFormatError
from codec.names import DomainName
from config.record_types import CLASS_IN, CLASS_NAMES
from config.settings import DEFAULT_TTL
from publisher.zone import Zone, ZoneEntry

logger = logging.getLogger(__name__)

_CLASSES = set(CLASS_NAMES.values())


class ZoneFileError(ValueError):
    """Unparseable zone file; carries the line number of the offending record"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class _Logical:
    """One record or directive, continuation lines joined"""
    line: int
    blank_owner: bool
    tokens: List[str]


def _logical_lines(text: str) -> Iterator[_Logical]:
    depth = 0
    pending: List[str] = []
    start_line = 0
    blank_owner = False

    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split(';', 1)[0]
        if depth == 0:
            if not content.strip():
                continue
            start_line = number
            blank_owner = content[0] in ' \t'
            pending = []

        for token in content.replace('(', ' ( ').replace(')', ' ) ').split():
            if token == '(':
                depth += 1
            elif token == ')':
                depth -= 1
                if depth < 0:
                    raise ZoneFileError("unbalanced ')'", number)
            else:
                pending.append(token)

        if depth == 0 and pending:
            yield _Logical(start_line, blank_owner, pending)
            pending = []

    if depth:
        raise ZoneFileError("unterminated '(' at end of file", start_line)


def _absolute(token: str, origin: Optional[DomainName], line: int) -> DomainName:
    try:
        if token == '@':
            if origin is None:
                raise ZoneFileError("'@' used before any $ORIGIN", line)
            return origin
        if token.endswith('.'):
            return DomainName.from_text(token)
        if origin is None:
            raise ZoneFileError(f"relative name {token!r} with no $ORIGIN", line)
        return DomainName(DomainName.from_text(token).labels + origin.labels)
    except WireFormatError as e:
        raise ZoneFileError(f"bad name {token!r}: {e}", line)


def _number(token: str, what: str, line: int) -> int:
    if not (token.isascii() and token.isdigit()):
        raise ZoneFileError(f"{what} {token!r} is not a decimal integer", line)
    return int(token)


def _ttl_and_class(tokens: List[str], line: int) -> Tuple[Optional[int], List[str]]:
    """Consume [TTL] [CLASS] in either order; return (ttl, remaining tokens)"""
    ttl = None
    seen_class = False
    while tokens:
        head = tokens[0]
        if ttl is None and head.isascii() and head.isdigit():
            ttl = int(head)
        elif not seen_class and head.upper() in _CLASSES:
            if head.upper() != CLASS_NAMES[CLASS_IN]:
                raise ZoneFileError(f"class {head} is not supported, only IN", line)
            seen_class = True
        else:
            break
        tokens = tokens[1:]
    return ttl, tokens


def parse_zone_file(text: str, origin: Optional[DomainName] = None) -> Zone:
    """
    Read master-file text back into a Zone

    Args:
        text: Zone file contents
        origin: Initial origin when the file has no $ORIGIN line

    Returns:
        Zone with its SOA fields and CERT entries in file order
    """
    default_ttl = None
    soa = None
    primary_ns = None
    entries: List[ZoneEntry] = []
    previous_owner: Optional[DomainName] = None

    for record in _logical_lines(text):
        tokens, line = record.tokens, record.line
        keyword = tokens[0].upper()

        if not record.blank_owner and keyword == '$ORIGIN':
            if len(tokens) != 2:
                raise ZoneFileError("$ORIGIN takes exactly one name", line)
            origin = _absolute(tokens[1] if tokens[1].endswith('.') else tokens[1] + '.', None, line)
            continue
        if not record.blank_owner and keyword == '$TTL':
            if len(tokens) != 2:
                raise ZoneFileError("$TTL takes exactly one value", line)
            default_ttl = _number(tokens[1], '$TTL', line)
            continue
        if not record.blank_owner and keyword.startswith('$'):
            raise ZoneFileError(f"directive {tokens[0]} is not supported", line)

        if record.blank_owner:
            if previous_owner is None:
                raise ZoneFileError("record without owner and no previous owner", line)
            owner = previous_owner
        else:
            owner = _absolute(tokens[0], origin, line)
            tokens = tokens[1:]
        previous_owner = owner

        ttl, tokens = _ttl_and_class(tokens, line)
        if not tokens:
            raise ZoneFileError("record has no type", line)
        rr_type, rdata = tokens[0].upper(), tokens[1:]
        if ttl is None:
            ttl = default_ttl if default_ttl is not None else DEFAULT_TTL

        if rr_type == 'SOA':
            if soa is not None:
                raise ZoneFileError("second SOA record", line)
            if len(rdata) != 7:
                raise ZoneFileError(f"SOA needs 7 fields, got {len(rdata)}", line)
            soa = (
                owner,
                _absolute(rdata[0], origin, line),
                _absolute(rdata[1], origin, line),
                [_number(token, 'SOA field', line) for token in rdata[2:]],
                ttl,
            )
        elif rr_type == 'NS':
            if len(rdata) != 1:
                raise ZoneFileError("NS takes exactly one name", line)
            if primary_ns is None:
                primary_ns = _absolute(rdata[0], origin, line)
        elif rr_type == 'CERT':
            try:
                entries.append(ZoneEntry(owner, ttl, parse_cert_presentation(' '.join(rdata))))
            except (WireFormatError, ValueError) as e:
                raise ZoneFileError(f"bad CERT record at {owner}: {e}", line)
        else:
            logger.warning(f"Skipping unsupported {rr_type} record at {owner} (line {line})")

    if soa is None:
        raise ZoneFileError("zone file has no SOA record")
    apex, mname, rname, (serial, refresh, retry, expire, minimum), soa_ttl = soa

    return Zone(
        origin=apex,
        primary_ns=primary_ns or mname,
        hostmaster=rname,
        serial=serial,
        default_ttl=default_ttl if default_ttl is not None else soa_ttl,
        refresh=refresh,
        retry=retry,
        expire=expire,
        minimum=minimum,
        entries=tuple(entries),
    )


def read_zone_file(path: str) -> Zone:
    """
    Load a zone file from disk

    Args:
        path: Zone file path

    Returns:
        Zone
    """
    with open(path, 'r', encoding='ascii') as f:
        return parse_zone_file(f.read())
