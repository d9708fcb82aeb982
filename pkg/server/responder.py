"""
Authoritative answering logic, independent of sockets
"""
import logging
from dataclasses import replace
from typing import Optional

from codec.exceptions import WireFormatError
from codec.wire import HEADER_SIZE, DnsMessage, Edns, MessageFlags, decode_header, decode_message, encode_message
from config.record_types import (
    CLASS_ANY,
    CLASS_IN,
    CLASS_NAMES,
    CLASSIC_UDP_LIMIT,
    EDNS_MAX_PAYLOAD,
    OPCODE_QUERY,
    RCODE_FORMERR,
    RCODE_NAMES,
    RCODE_NOERROR,
    RCODE_NOTIMP,
    RCODE_NXDOMAIN,
    RCODE_REFUSED,
    TYPE_ANY,
    TYPE_CERT,
    TYPE_NAMES,
    TYPE_SOA,
)
from publisher.zone import Zone

logger = logging.getLogger(__name__)


def effective_budget(query: DnsMessage, transport_budget: Optional[int]) -> Optional[int]:
    """
    Largest response the client accepts over this transport

    Args:
        query: Decoded query
        transport_budget: Server-side UDP cap, None for TCP

    Returns:
        Octet limit, or None when no truncation applies
    """
    if transport_budget is None:
        return None
    advertised = query.edns.udp_payload_size if query.edns is not None else CLASSIC_UDP_LIMIT
    # advertised sizes below 512 are treated as 512
    return max(CLASSIC_UDP_LIMIT, min(advertised, transport_budget))


def _response_flags(query: DnsMessage, rcode: int, aa: bool) -> MessageFlags:
    return MessageFlags(qr=True, opcode=query.flags.opcode, aa=aa, rd=query.flags.rd, rcode=rcode)


def _echo_edns(query: DnsMessage, advertised_payload: int) -> Optional[Edns]:
    if query.edns is None:
        return None
    return Edns(udp_payload_size=advertised_payload)


def answer(query: DnsMessage, zone: Zone, transport_budget: Optional[int],
           advertised_payload: int = EDNS_MAX_PAYLOAD) -> DnsMessage:
    """
    Build the response to one query from a zone snapshot

    Args:
        query: Decoded query with exactly one question
        zone: Zone snapshot
        transport_budget: UDP cap the server honors, None over TCP
        advertised_payload: UDP size announced in the echoed OPT record

    Returns:
        Response message; TC set with an empty answer when the full response
        exceeds the effective budget
    """
    edns = _echo_edns(query, advertised_payload)
    if query.question is None:
        return DnsMessage(query.id, _response_flags(query, RCODE_FORMERR, False), edns=edns)
    if query.flags.opcode != OPCODE_QUERY:
        return DnsMessage(query.id, _response_flags(query, RCODE_NOTIMP, False), query.question, edns=edns)

    question = query.question
    if question.qclass not in (CLASS_IN, CLASS_ANY):
        logger.debug(f"Refusing {question.name} in class {CLASS_NAMES.get(question.qclass, question.qclass)}")
        return DnsMessage(query.id, _response_flags(query, RCODE_REFUSED, False), question, edns=edns)

    qname = question.name
    if not zone.contains(qname):
        return DnsMessage(query.id, _response_flags(query, RCODE_NXDOMAIN, True), question, edns=edns)

    answers = []
    if question.qtype in (TYPE_SOA, TYPE_ANY) and qname == zone.origin:
        answers.append(replace(zone.soa_record(), owner=qname))
    if question.qtype in (TYPE_CERT, TYPE_ANY):
        # owner written as the question name so it compresses to a pointer
        answers.extend(entry.to_resource_record(qname) for entry in zone.sorted_entries() if entry.owner == qname)

    authority = () if answers else (zone.soa_record(),)
    response = DnsMessage(
        id=query.id,
        flags=_response_flags(query, RCODE_NOERROR, True),
        question=question,
        answers=tuple(answers),
        authority=authority,
        edns=edns,
    )

    budget = effective_budget(query, transport_budget)
    if budget is not None and len(encode_message(response)) > budget:
        logger.debug(f"Response for {qname} exceeds {budget} octets, setting TC")
        response = DnsMessage(
            id=query.id,
            flags=replace(response.flags, tc=True),
            question=question,
            edns=edns,
        )
    return response


def respond(wire: bytes, zone: Zone, transport_budget: Optional[int],
            advertised_payload: int = EDNS_MAX_PAYLOAD) -> Optional[bytes]:
    """
    Wire-level wrapper around answer

    Args:
        wire: Raw query octets
        zone: Zone snapshot
        transport_budget: UDP cap, None over TCP
        advertised_payload: UDP size announced in echoed OPT records

    Returns:
        Response octets, or None when the input must be dropped silently
    """
    try:
        query = decode_message(wire)
    except WireFormatError as e:
        if len(wire) < HEADER_SIZE:
            logger.warning(f"Dropping {len(wire)}-octet datagram: {e}")
            return None
        msg_id, flags = decode_header(wire)
        if flags.qr:
            return None
        logger.warning(f"FORMERR for query {msg_id}: {e}")
        formerr = MessageFlags(qr=True, opcode=flags.opcode, rd=flags.rd, rcode=RCODE_FORMERR)
        return encode_message(DnsMessage(msg_id, formerr))

    if query.flags.qr:
        logger.warning(f"Dropping response-flagged message {query.id}")
        return None

    response = answer(query, zone, transport_budget, advertised_payload)
    if query.question is not None:
        qtype = query.question.qtype
        logger.debug(
            f"{query.question.name} {TYPE_NAMES.get(qtype, qtype)} -> {RCODE_NAMES.get(response.flags.rcode)} "
            f"answers={len(response.answers)} tc={response.flags.tc}"
        )
    return encode_message(response)
