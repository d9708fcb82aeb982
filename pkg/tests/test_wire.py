import struct

import dns.message
import dns.name
import dns.rdataclass
import dns.rdatatype
import dns.rrset
import numpy as np
import pytest

from codec.cert_rdata import CertRecordData
from codec.exceptions import (
    CompressionLoopError,
    CountMismatchError,
    EdnsPlacementError,
    ForwardPointerError,
    MalformedLabelError,
    NameTooLongError,
    RdataTooLongError,
    SectionCountOverflowError,
    TruncatedMessageError,
    WireFormatError,
)
from codec.names import DomainName
from codec.wire import (
    DnsMessage,
    Edns,
    MessageFlags,
    Question,
    ResourceRecord,
    build_query,
    decode_header,
    decode_message,
    encode_message,
)
from config.record_types import CLASS_IN, TYPE_CERT, TYPE_SOA

LABEL_ALPHABET = np.frombuffer(b"abcdefghijklmnopqrstuvwxyz0123456789-", dtype=np.uint8)

EXAMPLE_QUERY = (
    b'\x00\x00\x01\x00\x00\x01\x00\x00\x00\x00\x00\x00'
    b'\x07example\x03com\x00'
    b'\x00\x25\x00\x01'
)


def _cert_answer(owner: str, payload: bytes = b'\x30\x03\x02\x01\x05', key_tag: int = 7) -> ResourceRecord:
    return ResourceRecord.cert(DomainName.from_text(owner), 86400, CertRecordData(1, key_tag, 5, payload))


def _response(qname: str, *answers: ResourceRecord, edns=None) -> DnsMessage:
    return DnsMessage(
        id=0x1234,
        flags=MessageFlags(qr=True, aa=True),
        question=Question(DomainName.from_text(qname), TYPE_CERT),
        answers=answers,
        edns=edns,
    )


class TestEncode:
    def test_example_query_is_29_octets(self):
        query = build_query(DomainName.from_text('example.com'), TYPE_CERT, 0)
        wire = encode_message(query)
        assert len(wire) == 29
        assert wire == EXAMPLE_QUERY

    def test_edns_adds_opt_with_payload_in_class(self):
        query = build_query(DomainName.from_text('example.com'), TYPE_CERT, 0, edns_payload=4096)
        wire = encode_message(query)
        assert len(wire) == 29 + 11
        assert struct.unpack('!H', wire[10:12]) == (1,)
        assert wire[29:] == b'\x00\x00\x29\x10\x00\x00\x00\x00\x00\x00\x00'

    def test_answer_owner_equal_to_qname_is_compressed(self):
        wire = encode_message(_response('www.polito.it', _cert_answer('www.polito.it')))
        question_end = 12 + DomainName.from_text('www.polito.it').wire_length + 4
        assert wire[question_end:question_end + 2] == b'\xc0\x0c'

    def test_other_owners_are_written_in_full(self):
        wire = encode_message(_response('www.polito.it', _cert_answer('ca.polito.it')))
        assert b'\xc0\x0c' not in wire
        assert b'\x02ca\x06polito\x02it\x00' in wire

    def test_deterministic(self):
        message = _response('www.polito.it', _cert_answer('www.polito.it'), edns=Edns(1232))
        assert encode_message(message) == encode_message(message)

    def test_section_count_overflow(self):
        record = _cert_answer('www.polito.it')
        message = _response('www.polito.it', *([record] * 0x10000))
        with pytest.raises(SectionCountOverflowError):
            encode_message(message)

    def test_opt_counts_towards_additional(self):
        record = _cert_answer('www.polito.it')
        message = DnsMessage(1, additional=(record,) * 0xFFFF, edns=Edns())
        with pytest.raises(SectionCountOverflowError):
            encode_message(message)

    def test_rdata_too_long(self):
        with pytest.raises(RdataTooLongError):
            ResourceRecord(DomainName.from_text('x.it'), 1, CLASS_IN, TYPE_CERT, b'\x00' * 0x10000)

    def test_name_too_long_cannot_even_be_built(self):
        with pytest.raises(NameTooLongError):
            DomainName.from_labels(['x' * 60] * 5)


class TestDecode:
    def test_example_query(self):
        message = decode_message(EXAMPLE_QUERY)
        assert message.id == 0
        assert message.flags.rd and not message.flags.qr
        assert message.question == Question(DomainName.from_text('example.com'), TYPE_CERT, CLASS_IN)
        assert message.edns is None

    def test_round_trip_of_example(self):
        assert encode_message(decode_message(EXAMPLE_QUERY)) == EXAMPLE_QUERY

    def test_opt_payload_is_surfaced(self):
        wire = encode_message(build_query(DomainName.from_text('example.com'), TYPE_CERT, 9, edns_payload=4096))
        message = decode_message(wire)
        assert message.edns == Edns(udp_payload_size=4096)
        assert message.additional == ()

    def test_tc_flag(self):
        wire = bytearray(encode_message(_response('www.polito.it')))
        wire[2] |= 0x02
        assert decode_message(bytes(wire)).flags.tc

    def test_pointer_loop(self):
        wire = b'\x00\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00' + b'\xc0\x0c' + b'\x00\x25\x00\x01'
        with pytest.raises(CompressionLoopError):
            decode_message(wire)

    def test_two_pointer_cycle(self):
        # answer owner at 12 points at 14, which points back at 12
        header = b'\x00\x01\x80\x00\x00\x00\x00\x01\x00\x00\x00\x00'
        with pytest.raises(CompressionLoopError):
            decode_message(header + b'\xc0\x0e\xc0\x0c' + b'\x00' * 10)

    def test_forward_pointer_without_cycle(self):
        header = b'\x00\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00'
        with pytest.raises(ForwardPointerError):
            decode_message(header + b'\xc0\x12' + b'\x00\x25\x00\x01' + b'\x01a\x00')

    def test_labels_then_backward_pointer(self):
        header = b'\x00\x01\x80\x00\x00\x01\x00\x01\x00\x00\x00\x00'
        question = b'\x03www\x06polito\x02it\x00' + b'\x00\x25\x00\x01'
        # owner "ftp" followed by a pointer to "polito.it" inside the question
        answer = b'\x03ftp\xc0\x10' + struct.pack('!HHIH', 37, 1, 60, 6) + b'\x00\x01\x00\x00\x00A'
        message = decode_message(header + question + answer)
        assert message.answers[0].owner == DomainName.from_text('ftp.polito.it')
        assert message.answers[0].rdata == b'\x00\x01\x00\x00\x00A'

    def test_short_header(self):
        with pytest.raises(TruncatedMessageError):
            decode_message(b'\x00' * 11)

    def test_label_past_end(self):
        with pytest.raises(TruncatedMessageError):
            decode_message(EXAMPLE_QUERY[:20])

    def test_trailing_octets(self):
        with pytest.raises(CountMismatchError):
            decode_message(EXAMPLE_QUERY + b'\x00')

    def test_more_than_one_question(self):
        wire = bytearray(EXAMPLE_QUERY)
        wire[5] = 2
        with pytest.raises(CountMismatchError):
            decode_message(bytes(wire))

    def test_reserved_label_type(self):
        wire = EXAMPLE_QUERY[:12] + b'\x41' + EXAMPLE_QUERY[13:]
        with pytest.raises(MalformedLabelError):
            decode_message(wire)

    def test_opt_outside_additional(self):
        opt = b'\x00\x00\x29\x10\x00\x00\x00\x00\x00\x00\x00'
        wire = bytearray(EXAMPLE_QUERY + opt)
        wire[7] = 1  # ancount
        with pytest.raises(EdnsPlacementError):
            decode_message(bytes(wire))

    def test_two_opt_records(self):
        opt = b'\x00\x00\x29\x10\x00\x00\x00\x00\x00\x00\x00'
        wire = bytearray(EXAMPLE_QUERY + opt + opt)
        wire[11] = 2
        with pytest.raises(EdnsPlacementError):
            decode_message(bytes(wire))

    def test_header_only(self):
        msg_id, flags = decode_header(b'\xab\xcd\x85\x83')
        assert msg_id == 0xABCD
        assert flags.qr and flags.aa and flags.rd and flags.rcode == 3

    def test_unknown_types_are_opaque(self):
        record = ResourceRecord(DomainName.from_text('polito.it'), 60, CLASS_IN, 99, b'\x01\x02\x03')
        message = DnsMessage(5, MessageFlags(qr=True), answers=(record,))
        assert decode_message(encode_message(message)).answers == (record,)


class TestDnspythonAgreement:
    def test_dnspython_reads_our_query(self):
        wire = encode_message(build_query(DomainName.from_text('marinus.marian.polito.it'), TYPE_CERT, 4242,
                                          edns_payload=4096))
        parsed = dns.message.from_wire(wire)
        assert parsed.id == 4242
        assert parsed.question[0].name == dns.name.from_text('marinus.marian.polito.it.')
        assert parsed.question[0].rdtype == dns.rdatatype.CERT
        assert parsed.edns == 0
        assert parsed.payload == 4096

    def test_we_read_dnspython_query(self):
        query = dns.message.make_query('www.polito.it', 'CERT', use_edns=0, payload=1232)
        message = decode_message(query.to_wire())
        assert message.id == query.id
        assert message.question.name == DomainName.from_text('www.polito.it')
        assert message.question.qtype == TYPE_CERT
        assert message.edns.udp_payload_size == 1232

    def test_dnspython_reads_our_cert_answer(self):
        payload = bytes(range(256)) * 3
        wire = encode_message(_response('www.polito.it', _cert_answer('www.polito.it', payload, key_tag=30132)))
        parsed = dns.message.from_wire(wire)
        rrset = parsed.find_rrset(parsed.answer, dns.name.from_text('www.polito.it.'),
                                  dns.rdataclass.IN, dns.rdatatype.CERT)
        rdata = rrset[0]
        assert rdata.certificate_type == 1
        assert rdata.key_tag == 30132
        assert rdata.algorithm == 5
        assert rdata.certificate == payload

    def test_we_read_dnspython_compressed_response(self):
        query = dns.message.make_query('www.polito.it', 'CERT')
        response = dns.message.make_response(query)
        response.answer.append(dns.rrset.from_text('www.polito.it.', 3600, 'IN', 'CERT', 'PKIX 7 RSASHA1 QUJD'))
        response.authority.append(dns.rrset.from_text(
            'polito.it.', 3600, 'IN', 'SOA', 'ns1.polito.it. hostmaster.polito.it. 1 3600 600 604800 300'))
        message = decode_message(response.to_wire())
        assert message.answers[0].cert_data() == CertRecordData(1, 7, 5, b'ABC')
        assert message.authority[0].rr_type == TYPE_SOA
        assert message.authority[0].owner == DomainName.from_text('polito.it')


def _random_name(rng) -> DomainName:
    labels = []
    for _ in range(int(rng.integers(1, 5))):
        size = int(rng.integers(1, 20))
        labels.append(rng.choice(LABEL_ALPHABET, size=size).tobytes())
    return DomainName(tuple(labels))


def _random_message(rng) -> DnsMessage:
    qname = _random_name(rng)
    answers = []
    for _ in range(int(rng.integers(0, 4))):
        owner = qname if rng.random() < 0.5 else _random_name(rng)
        payload = rng.integers(0, 256, size=int(rng.integers(1, 400)), dtype='uint8').tobytes()
        record = CertRecordData(int(rng.integers(0, 0x10000)), int(rng.integers(0, 0x10000)),
                                int(rng.integers(0, 0x100)), payload)
        answers.append(ResourceRecord.cert(owner, int(rng.integers(0, 2 ** 32)), record))
    edns = Edns(int(rng.integers(512, 0x10000))) if rng.random() < 0.5 else None
    return DnsMessage(
        id=int(rng.integers(0, 0x10000)),
        flags=MessageFlags(qr=True, aa=bool(rng.random() < 0.5), tc=bool(rng.random() < 0.2), rcode=0),
        question=Question(qname, TYPE_CERT),
        answers=tuple(answers),
        edns=edns,
    )


def test_random_messages_round_trip(rng):
    for _ in range(1000):
        message = _random_message(rng)
        wire = encode_message(message)
        decoded = decode_message(wire)
        assert decoded == message
        assert encode_message(decoded) == wire


def test_mutated_messages_fail_only_with_wire_errors(rng):
    base = encode_message(_random_message(rng))
    for _ in range(3000):
        wire = bytearray(base)
        for position in rng.integers(0, len(wire), size=int(rng.integers(1, 6))):
            wire[int(position)] = int(rng.integers(0, 256))
        cut = int(rng.integers(0, len(wire) + 1))
        try:
            decode_message(bytes(wire[:cut]))
        except WireFormatError:
            pass
