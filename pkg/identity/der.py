"""
Bounded DER tag-length-value reader
"""
from dataclasses import dataclass
from typing import Iterator

# Tag classes (bits 7-6 of the identifier octet)
CLASS_UNIVERSAL = 0
CLASS_APPLICATION = 1
CLASS_CONTEXT = 2
CLASS_PRIVATE = 3

# Universal tag numbers used by certificates
TAG_BOOLEAN = 0x01
TAG_INTEGER = 0x02
TAG_BIT_STRING = 0x03
TAG_OCTET_STRING = 0x04
TAG_NULL = 0x05
TAG_OID = 0x06
TAG_UTF8_STRING = 0x0C
TAG_SEQUENCE = 0x10
TAG_SET = 0x11
TAG_NUMERIC_STRING = 0x12
TAG_PRINTABLE_STRING = 0x13
TAG_T61_STRING = 0x14
TAG_IA5_STRING = 0x16
TAG_UTC_TIME = 0x17
TAG_GENERALIZED_TIME = 0x18
TAG_VISIBLE_STRING = 0x1A
TAG_UNIVERSAL_STRING = 0x1C
TAG_BMP_STRING = 0x1E

MAX_LENGTH_OCTETS = 4


class MalformedDerError(ValueError):
    """Tag/length violation or truncated DER input"""


@dataclass(frozen=True)
class Tlv:
    """One DER element located inside a buffer"""
    data: bytes
    tag_class: int
    constructed: bool
    tag: int
    start: int          # offset of the identifier octet
    value_start: int
    end: int            # one past the last value octet

    @property
    def value(self) -> bytes:
        return self.data[self.value_start:self.end]

    @property
    def encoded(self) -> bytes:
        """The element including its tag and length octets"""
        return self.data[self.start:self.end]

    def is_universal(self, tag: int) -> bool:
        return self.tag_class == CLASS_UNIVERSAL and self.tag == tag

    def is_context(self, tag: int) -> bool:
        return self.tag_class == CLASS_CONTEXT and self.tag == tag

    def children(self) -> Iterator['Tlv']:
        """Iterate the elements nested in a constructed value"""
        if not self.constructed:
            raise MalformedDerError(f"primitive element at offset {self.start} has no children")
        return iter_tlv(self.data, self.value_start, self.end)

    def describe(self) -> str:
        return f"class {self.tag_class} tag {self.tag} at offset {self.start}"


def read_tlv(data: bytes, offset: int, limit: int) -> Tlv:
    """
    Read one element starting at offset, never looking past limit

    Args:
        data: Whole buffer
        offset: Identifier octet position
        limit: End of the enclosing value

    Returns:
        Tlv
    """
    limit = min(limit, len(data))
    if offset >= limit:
        raise MalformedDerError(f"expected an element at offset {offset}, input ends at {limit}")

    identifier = data[offset]
    position = offset + 1
    tag_class = identifier >> 6
    constructed = bool(identifier & 0x20)
    tag = identifier & 0x1F

    if tag == 0x1F:
        # high tag number form, base-128 continuation octets
        tag = 0
        while True:
            if position >= limit:
                raise MalformedDerError(f"tag number at offset {offset} runs past the input")
            octet = data[position]
            position += 1
            tag = (tag << 7) | (octet & 0x7F)
            if not octet & 0x80:
                break
            if tag > 0xFFFFFF:
                raise MalformedDerError(f"tag number at offset {offset} is too large")

    if position >= limit:
        raise MalformedDerError(f"length octet missing at offset {position}")
    first = data[position]
    position += 1

    if first < 0x80:
        length = first
    elif first == 0x80:
        raise MalformedDerError(f"indefinite length at offset {position - 1} is not DER")
    else:
        count = first & 0x7F
        if count > MAX_LENGTH_OCTETS:
            raise MalformedDerError(f"{count}-octet length field at offset {position - 1}")
        if position + count > limit:
            raise MalformedDerError(f"length field at offset {position - 1} runs past the input")
        length = int.from_bytes(data[position:position + count], 'big')
        position += count

    end = position + length
    if end > limit:
        raise MalformedDerError(
            f"element at offset {offset} declares {length} octets, only {limit - position} available"
        )
    return Tlv(data, tag_class, constructed, tag, offset, position, end)


def iter_tlv(data: bytes, offset: int, limit: int) -> Iterator[Tlv]:
    while offset < limit:
        element = read_tlv(data, offset, limit)
        yield element
        offset = element.end


def expect(element: Tlv, tag: int, what: str) -> Tlv:
    if not element.is_universal(tag):
        raise MalformedDerError(f"expected {what}, found {element.describe()}")
    if tag in (TAG_SEQUENCE, TAG_SET) and not element.constructed:
        raise MalformedDerError(f"{what} at offset {element.start} is not constructed")
    return element


def decode_oid(value: bytes) -> str:
    """
    Dotted-decimal form of an OBJECT IDENTIFIER value

    Args:
        value: Content octets of the OID

    Returns:
        e.g. '2.5.29.17'
    """
    if not value:
        raise MalformedDerError("empty OBJECT IDENTIFIER")
    arcs = []
    current = 0
    for octet in value:
        current = (current << 7) | (octet & 0x7F)
        if not octet & 0x80:
            arcs.append(current)
            current = 0
    if value[-1] & 0x80:
        raise MalformedDerError("OBJECT IDENTIFIER ends inside an arc")

    first = arcs[0]
    if first < 40:
        head = [0, first]
    elif first < 80:
        head = [1, first - 40]
    else:
        head = [2, first - 80]
    return '.'.join(str(arc) for arc in head + arcs[1:])
