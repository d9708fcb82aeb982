import logging
import struct
from dataclasses import replace

import pytest

from helpers import PERSONAL, REPOSITORY, SERVER

from codec.names import DomainName
from codec.wire import DnsMessage, Edns, MessageFlags, Question, build_query, decode_message, encode_message
from config.record_types import (
    RCODE_FORMERR,
    RCODE_NOERROR,
    RCODE_NOTIMP,
    RCODE_NXDOMAIN,
    RCODE_REFUSED,
    TYPE_ANY,
    TYPE_CERT,
    TYPE_SOA,
)
from publisher.entry_builder import response_size
from publisher.zone import upsert
from server.responder import effective_budget, respond

UDP = 4096


def _ask(zone, name: str, qtype: int = TYPE_CERT, edns=None, budget=UDP, msg_id: int = 0x4242) -> DnsMessage:
    query = build_query(DomainName.from_text(name), qtype, msg_id, edns_payload=edns)
    return decode_message(respond(encode_message(query), zone, budget))


class TestEffectiveBudget:
    @pytest.mark.parametrize('edns, transport, expected', [
        (None, 4096, 512),
        (4096, 4096, 4096),
        (4096, 1232, 1232),
        (1232, 4096, 1232),
        (300, 4096, 512),
        (None, None, None),
        (4096, None, None),
    ])
    def test_budget(self, edns, transport, expected):
        query = build_query(DomainName.from_text('www.polito.it'), TYPE_CERT, 1, edns_payload=edns)
        assert effective_budget(query, transport) == expected


class TestAnswers:
    def test_edns_response_carries_the_certificate(self, fixture_zone, personal_der):
        response = _ask(fixture_zone, PERSONAL['owner'], edns=4096)
        assert response.id == 0x4242
        assert response.flags.qr and response.flags.aa and not response.flags.tc
        assert response.flags.rcode == RCODE_NOERROR
        [record] = response.answers
        assert record.owner == DomainName.from_text(PERSONAL['owner'])
        assert record.ttl == 86400
        assert record.cert_data().payload == personal_der
        assert record.cert_data().key_tag == PERSONAL['key_tag']
        assert response.edns == Edns(udp_payload_size=4096)

    def test_response_size_prediction(self, fixture_zone):
        query = build_query(DomainName.from_text(PERSONAL['owner']), TYPE_CERT, 1, edns_payload=4096)
        wire = respond(encode_message(query), fixture_zone, UDP)
        [entry] = fixture_zone.entries_at(DomainName.from_text(PERSONAL['owner']))
        assert len(wire) == response_size(entry.owner, entry.record) == 1468

    def test_answer_owner_is_a_pointer(self, fixture_zone):
        query = build_query(DomainName.from_text(SERVER['owner']), TYPE_CERT, 1, edns_payload=4096)
        wire = respond(encode_message(query), fixture_zone, UDP)
        question_end = 12 + DomainName.from_text(SERVER['owner']).wire_length + 4
        assert wire[question_end:question_end + 2] == b'\xc0\x0c'

    def test_query_case_is_preserved(self, fixture_zone):
        query = build_query(DomainName.from_text('WWW.Polito.IT'), TYPE_CERT, 1, edns_payload=4096)
        wire = respond(encode_message(query), fixture_zone, UDP)
        assert b'\x03WWW\x06Polito\x02IT\x00' in wire
        assert len(decode_message(wire).answers) == 1

    def test_small_certificate_fits_without_edns(self, fixture_zone):
        response = _ask(fixture_zone, REPOSITORY['owner'])
        assert not response.flags.tc
        assert len(response.answers) == 1
        assert response.edns is None

    def test_several_certificates_in_key_tag_order(self, fixture_zone):
        [entry] = fixture_zone.entries_at(DomainName.from_text(SERVER['owner']))
        renewed = replace(entry, record=replace(entry.record, key_tag=7, payload=b'\x30\x00'))
        zone = upsert(fixture_zone, renewed)
        response = _ask(zone, SERVER['owner'], edns=4096)
        assert [record.cert_data().key_tag for record in response.answers] == [7, SERVER['key_tag']]

    def test_any_returns_certificates(self, fixture_zone):
        response = _ask(fixture_zone, SERVER['owner'], qtype=TYPE_ANY, edns=4096)
        assert [record.rr_type for record in response.answers] == [TYPE_CERT]

    def test_soa_at_apex(self, fixture_zone):
        response = _ask(fixture_zone, 'polito.it', qtype=TYPE_SOA)
        [soa] = response.answers
        assert soa.rr_type == TYPE_SOA
        assert struct.unpack('!I', soa.rdata[-20:-16]) == (fixture_zone.serial,)


class TestTruncation:
    def test_large_answer_without_edns_is_truncated(self, fixture_zone):
        query = build_query(DomainName.from_text(PERSONAL['owner']), TYPE_CERT, 9)
        wire = respond(encode_message(query), fixture_zone, UDP)
        response = decode_message(wire)
        assert response.flags.tc
        assert response.answers == () and response.authority == ()
        assert response.question == query.question
        assert len(wire) == 12 + DomainName.from_text(PERSONAL['owner']).wire_length + 4

    def test_advertised_size_below_answer(self, fixture_zone):
        response = _ask(fixture_zone, PERSONAL['owner'], edns=1232)
        assert response.flags.tc
        assert response.answers == ()
        assert response.edns is not None

    def test_server_cap_below_advertised(self, fixture_zone):
        response = _ask(fixture_zone, PERSONAL['owner'], edns=4096, budget=1400)
        assert response.flags.tc

    def test_tcp_never_truncates(self, fixture_zone):
        response = _ask(fixture_zone, PERSONAL['owner'], budget=None)
        assert not response.flags.tc
        assert len(response.answers) == 1

    def test_tcp_and_edns_udp_bytes_agree(self, fixture_zone):
        query = encode_message(build_query(DomainName.from_text(SERVER['owner']), TYPE_CERT, 3, edns_payload=4096))
        assert respond(query, fixture_zone, None) == respond(query, fixture_zone, UDP)


class TestErrors:
    def test_out_of_zone_is_nxdomain(self, fixture_zone):
        response = _ask(fixture_zone, 'www.example.org')
        assert response.flags.rcode == RCODE_NXDOMAIN
        assert response.flags.aa
        assert response.answers == ()

    def test_missing_owner_is_nodata_with_soa(self, fixture_zone):
        response = _ask(fixture_zone, 'ca.polito.it')
        assert response.flags.rcode == RCODE_NOERROR
        assert response.answers == ()
        assert [record.rr_type for record in response.authority] == [TYPE_SOA]

    def test_other_type_is_nodata(self, fixture_zone):
        response = _ask(fixture_zone, SERVER['owner'], qtype=1)
        assert response.flags.rcode == RCODE_NOERROR
        assert response.answers == ()

    def test_chaos_class_is_refused(self, fixture_zone, caplog):
        query = DnsMessage(5, MessageFlags(rd=True), Question(DomainName.from_text(SERVER['owner']), TYPE_CERT, 3))
        with caplog.at_level(logging.DEBUG, logger='server.responder'):
            response = decode_message(respond(encode_message(query), fixture_zone, UDP))
        assert response.flags.rcode == RCODE_REFUSED
        assert 'in class CH' in caplog.text

    def test_query_log_names_the_type(self, fixture_zone, caplog):
        with caplog.at_level(logging.DEBUG, logger='server.responder'):
            _ask(fixture_zone, SERVER['owner'])
        assert f"{SERVER['owner']} CERT -> NOERROR" in caplog.text

    def test_non_query_opcode(self, fixture_zone):
        query = DnsMessage(5, MessageFlags(opcode=2), Question(DomainName.from_text(SERVER['owner']), TYPE_CERT))
        response = decode_message(respond(encode_message(query), fixture_zone, UDP))
        assert response.flags.rcode == RCODE_NOTIMP
        assert response.flags.opcode == 2

    def test_no_question_is_formerr(self, fixture_zone):
        response = decode_message(respond(encode_message(DnsMessage(6, MessageFlags(rd=True))), fixture_zone, UDP))
        assert response.flags.rcode == RCODE_FORMERR
        assert response.flags.rd

    def test_garbage_after_header_is_formerr(self, fixture_zone):
        wire = b'\xbe\xef\x01\x00\x00\x01\x00\x00\x00\x00\x00\x00' + b'\xff\xff\xff'
        response = decode_message(respond(wire, fixture_zone, UDP))
        assert response.id == 0xBEEF
        assert response.flags.qr and response.flags.rd
        assert response.flags.rcode == RCODE_FORMERR
        assert response.question is None

    def test_short_datagram_is_dropped(self, fixture_zone):
        assert respond(b'\x00' * 11, fixture_zone, UDP) is None

    def test_responses_are_never_answered(self, fixture_zone):
        response_wire = encode_message(DnsMessage(1, MessageFlags(qr=True), Question(DomainName.from_text('polito.it'),
                                                                                     TYPE_SOA)))
        assert respond(response_wire, fixture_zone, UDP) is None
        assert respond(b'\x00\x01\x80\x00' + b'\x00\x05' + b'\x00' * 6, fixture_zone, UDP) is None

    def test_random_input_never_raises(self, fixture_zone, rng):
        for _ in range(2000):
            wire = rng.integers(0, 256, size=int(rng.integers(0, 80)), dtype='uint8').tobytes()
            result = respond(wire, fixture_zone, UDP)
            assert result is None or len(result) >= 12
