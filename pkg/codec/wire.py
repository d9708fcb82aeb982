"""
DNS message wire codec with EDNS0 and answer-name compression
"""
import struct
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from codec.cert_rdata import CertRecordData, decode_cert_rdata, encode_cert_rdata
from codec.exceptions import (
    CountMismatchError,
    EdnsPlacementError,
    ForwardPointerError,
    MalformedLabelError,
    RdataTooLongError,
    SectionCountOverflowError,
    TruncatedMessageError,
    WireFormatError,
)
from codec.names import DomainName
from config.record_types import CLASS_IN, TYPE_CERT, TYPE_OPT

HEADER = struct.Struct('!HHHHHH')
QUESTION_TAIL = struct.Struct('!HH')
RR_HEADER = struct.Struct('!HHIH')  # type, class, ttl, rdlength

HEADER_SIZE = HEADER.size
QNAME_OFFSET = HEADER_SIZE
POINTER_MASK = 0xC0
MAX_COUNT = 0xFFFF
MAX_RDATA = 0xFFFF


@dataclass(frozen=True)
class MessageFlags:
    """Header flag word, unpacked"""
    qr: bool = False
    opcode: int = 0
    aa: bool = False
    tc: bool = False
    rd: bool = False
    ra: bool = False
    z: int = 0        # reserved, AD and CD bits, carried verbatim
    rcode: int = 0

    def to_int(self) -> int:
        return (
            (int(self.qr) << 15)
            | ((self.opcode & 0xF) << 11)
            | (int(self.aa) << 10)
            | (int(self.tc) << 9)
            | (int(self.rd) << 8)
            | (int(self.ra) << 7)
            | ((self.z & 0x7) << 4)
            | (self.rcode & 0xF)
        )

    @classmethod
    def from_int(cls, value: int) -> 'MessageFlags':
        return cls(
            qr=bool(value & 0x8000),
            opcode=(value >> 11) & 0xF,
            aa=bool(value & 0x0400),
            tc=bool(value & 0x0200),
            rd=bool(value & 0x0100),
            ra=bool(value & 0x0080),
            z=(value >> 4) & 0x7,
            rcode=value & 0xF,
        )


@dataclass(frozen=True)
class Question:
    name: DomainName
    qtype: int
    qclass: int = CLASS_IN


@dataclass(frozen=True)
class ResourceRecord:
    owner: DomainName
    ttl: int
    rr_class: int
    rr_type: int
    rdata: bytes

    def __post_init__(self):
        if len(self.rdata) > MAX_RDATA:
            raise RdataTooLongError(f"rdata of {len(self.rdata)} octets exceeds {MAX_RDATA}")
        if not 0 <= self.ttl <= 0xFFFFFFFF:
            raise WireFormatError(f"TTL {self.ttl} does not fit 32 bits")

    @classmethod
    def cert(cls, owner: DomainName, ttl: int, data: CertRecordData,
             rr_class: int = CLASS_IN) -> 'ResourceRecord':
        return cls(owner, ttl, rr_class, TYPE_CERT, encode_cert_rdata(data))

    def cert_data(self) -> CertRecordData:
        if self.rr_type != TYPE_CERT:
            raise WireFormatError(f"record type {self.rr_type} is not CERT")
        return decode_cert_rdata(self.rdata)


@dataclass(frozen=True)
class Edns:
    """EDNS0 parameters carried by the OPT pseudo-record"""
    udp_payload_size: int = 4096
    extended_rcode: int = 0
    version: int = 0
    flags: int = 0
    options: bytes = b''

    @property
    def ttl_field(self) -> int:
        return (self.extended_rcode << 24) | (self.version << 16) | self.flags


@dataclass(frozen=True)
class DnsMessage:
    id: int
    flags: MessageFlags = field(default_factory=MessageFlags)
    question: Optional[Question] = None
    answers: Tuple[ResourceRecord, ...] = ()
    authority: Tuple[ResourceRecord, ...] = ()
    additional: Tuple[ResourceRecord, ...] = ()
    edns: Optional[Edns] = None


def build_query(name: DomainName, qtype: int, msg_id: int, rd: bool = True,
                edns_payload: Optional[int] = None) -> DnsMessage:
    """
    Assemble a standard query

    Args:
        name: Query name
        qtype: Query type
        msg_id: 16-bit message id
        rd: Recursion desired flag
        edns_payload: Advertise this UDP payload size in an OPT record

    Returns:
        DnsMessage
    """
    edns = Edns(udp_payload_size=edns_payload) if edns_payload is not None else None
    return DnsMessage(
        id=msg_id,
        flags=MessageFlags(rd=rd),
        question=Question(name, qtype, CLASS_IN),
        edns=edns,
    )


def _encode_record(out: bytearray, record: ResourceRecord, owner_wire: bytes) -> None:
    out += owner_wire
    out += RR_HEADER.pack(record.rr_type, record.rr_class, record.ttl, len(record.rdata))
    out += record.rdata


def encode_message(msg: DnsMessage) -> bytes:
    """
    Encode a message to wire octets

    Answer owners that are byte-identical to the question name become a
    pointer to the question name; no other name is compressed.

    Args:
        msg: Message to encode

    Returns:
        Wire octets
    """
    counts = (
        1 if msg.question is not None else 0,
        len(msg.answers),
        len(msg.authority),
        len(msg.additional) + (1 if msg.edns is not None else 0),
    )
    for count in counts:
        if count > MAX_COUNT:
            raise SectionCountOverflowError(f"section of {count} records does not fit the 16-bit count")

    out = bytearray(HEADER.pack(msg.id, msg.flags.to_int(), *counts))

    qname_labels = None
    if msg.question is not None:
        out += msg.question.name.to_wire()
        out += QUESTION_TAIL.pack(msg.question.qtype, msg.question.qclass)
        if not msg.question.name.is_root():
            qname_labels = msg.question.name.labels

    pointer = struct.pack('!H', (POINTER_MASK << 8) | QNAME_OFFSET)
    for record in msg.answers:
        owner_wire = pointer if record.owner.labels == qname_labels else record.owner.to_wire()
        _encode_record(out, record, owner_wire)
    for record in msg.authority + msg.additional:
        _encode_record(out, record, record.owner.to_wire())

    if msg.edns is not None:
        edns = msg.edns
        if len(edns.options) > MAX_RDATA:
            raise RdataTooLongError("OPT options exceed 65535 octets")
        out += b'\x00'
        out += RR_HEADER.pack(TYPE_OPT, edns.udp_payload_size, edns.ttl_field, len(edns.options))
        out += edns.options

    return bytes(out)


class _Reader:
    """Bounded cursor over a wire message"""

    def __init__(self, wire: bytes):
        self.wire = wire
        self.offset = 0

    def take(self, count: int) -> bytes:
        end = self.offset + count
        if end > len(self.wire):
            raise TruncatedMessageError(
                f"need {count} octets at offset {self.offset}, message has {len(self.wire)}"
            )
        chunk = self.wire[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def name(self) -> DomainName:
        labels, self.offset = read_name(self.wire, self.offset)
        return DomainName(labels)


def read_name(wire: bytes, offset: int) -> Tuple[Tuple[bytes, ...], int]:
    """
    Read a possibly compressed name

    Args:
        wire: Whole message
        offset: Where the name starts

    Returns:
        (labels, offset just past the name in the original position)
    """
    labels: List[bytes] = []
    end_offset = None
    position = offset

    while True:
        if position >= len(wire):
            raise TruncatedMessageError(f"name runs past the end of the message at offset {position}")
        length = wire[position]
        kind = length & POINTER_MASK

        if kind == POINTER_MASK:
            if position + 1 >= len(wire):
                raise TruncatedMessageError("compression pointer cut short")
            target = ((length & 0x3F) << 8) | wire[position + 1]
            if end_offset is None:
                end_offset = position + 2
            # only earlier data may be referenced, so every chain ends
            if target >= position:
                raise ForwardPointerError(f"pointer at offset {position} targets offset {target}")
            position = target
        elif kind:
            raise MalformedLabelError(f"unsupported label type 0x{length:02x} at offset {position}")
        elif length == 0:
            if end_offset is None:
                end_offset = position + 1
            return tuple(labels), end_offset
        else:
            start = position + 1
            if start + length > len(wire):
                raise TruncatedMessageError(f"label at offset {position} runs past the end of the message")
            labels.append(bytes(wire[start:start + length]))
            position = start + length


def decode_header(wire: bytes) -> Tuple[int, MessageFlags]:
    """Read only the id and flags (enough to answer FORMERR)"""
    if len(wire) < 4:
        raise TruncatedMessageError("message shorter than id and flags")
    msg_id, flags = struct.unpack_from('!HH', wire)
    return msg_id, MessageFlags.from_int(flags)


def _decode_edns(record_class: int, ttl: int, rdata: bytes) -> Edns:
    return Edns(
        udp_payload_size=record_class,
        extended_rcode=(ttl >> 24) & 0xFF,
        version=(ttl >> 16) & 0xFF,
        flags=ttl & 0xFFFF,
        options=rdata,
    )


def decode_message(wire: bytes) -> DnsMessage:
    """
    Decode wire octets into a DnsMessage

    Follows compression pointers anywhere in the message and lifts a single
    OPT record out of the additional section into DnsMessage.edns.

    Args:
        wire: Raw message

    Returns:
        DnsMessage
    """
    wire = bytes(wire)
    if len(wire) < HEADER_SIZE:
        raise TruncatedMessageError(f"message of {len(wire)} octets is shorter than the 12-octet header")

    reader = _Reader(wire)
    msg_id, flags, qdcount, ancount, nscount, arcount = reader.unpack(HEADER)
    if qdcount > 1:
        raise CountMismatchError(f"{qdcount} questions; exactly one is supported")

    question = None
    if qdcount:
        qname = reader.name()
        qtype, qclass = reader.unpack(QUESTION_TAIL)
        question = Question(qname, qtype, qclass)

    sections = []
    edns = None
    for section_index, count in enumerate((ancount, nscount, arcount)):
        records = []
        for _ in range(count):
            owner = reader.name()
            rr_type, rr_class, ttl, rdlength = reader.unpack(RR_HEADER)
            rdata = reader.take(rdlength)
            if rr_type == TYPE_OPT:
                if section_index != 2:
                    raise EdnsPlacementError("OPT record outside the additional section")
                if edns is not None:
                    raise EdnsPlacementError("more than one OPT record")
                if not owner.is_root():
                    raise EdnsPlacementError("OPT record owner is not the root")
                edns = _decode_edns(rr_class, ttl, rdata)
                continue
            records.append(ResourceRecord(owner, ttl, rr_class, rr_type, rdata))
        sections.append(tuple(records))

    if reader.offset != len(wire):
        raise CountMismatchError(
            f"{len(wire) - reader.offset} octets left after the sections announced in the header"
        )

    return DnsMessage(
        id=msg_id,
        flags=MessageFlags.from_int(flags),
        question=question,
        answers=sections[0],
        authority=sections[1],
        additional=sections[2],
        edns=edns,
    )
