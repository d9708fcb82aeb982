"""
CERT resource record data: wire layout and master-file presentation
"""
import base64
import struct
from dataclasses import dataclass

from codec.exceptions import (
    EmptyPayloadError,
    InvalidBase64Error,
    PresentationError,
    TruncatedMessageError,
    UnknownMnemonicError,
    WireFormatError,
)
from codec.names import DomainName
from config.record_types import ALGORITHM_MNEMONICS, CERT_TYPE_MNEMONICS

CERT_HEADER = struct.Struct('!HHB')  # type, key tag, algorithm
BASE64_LINE_WIDTH = 64

_CERT_TYPE_VALUES = {name: value for value, name in CERT_TYPE_MNEMONICS.items()}
_ALGORITHM_VALUES = {name: value for value, name in ALGORITHM_MNEMONICS.items()}


@dataclass(frozen=True)
class CertRecordData:
    """The CERT RDATA quadruple"""
    cert_type: int
    key_tag: int
    algorithm: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.cert_type <= 0xFFFF:
            raise WireFormatError(f"certificate type {self.cert_type} does not fit 16 bits")
        if not 0 <= self.key_tag <= 0xFFFF:
            raise WireFormatError(f"key tag {self.key_tag} does not fit 16 bits")
        if not 0 <= self.algorithm <= 0xFF:
            raise WireFormatError(f"algorithm {self.algorithm} does not fit 8 bits")
        if not self.payload:
            raise EmptyPayloadError("CERT payload must not be empty")

    @property
    def type_text(self) -> str:
        return cert_type_text(self.cert_type)

    @property
    def algorithm_text(self) -> str:
        return algorithm_text(self.algorithm)


def cert_type_text(cert_type: int) -> str:
    return CERT_TYPE_MNEMONICS.get(cert_type, str(cert_type))


def algorithm_text(algorithm: int) -> str:
    return ALGORITHM_MNEMONICS.get(algorithm, str(algorithm))


def encode_cert_rdata(data: CertRecordData) -> bytes:
    """
    Pack CERT RDATA: type, key tag, algorithm, then the payload verbatim

    Args:
        data: Record to encode

    Returns:
        5 + len(payload) octets
    """
    if not data.payload:
        raise EmptyPayloadError("CERT payload must not be empty")
    return CERT_HEADER.pack(data.cert_type, data.key_tag, data.algorithm) + data.payload


def decode_cert_rdata(rdata: bytes) -> CertRecordData:
    """
    Unpack CERT RDATA

    Args:
        rdata: Raw RDATA octets

    Returns:
        CertRecordData
    """
    if len(rdata) < CERT_HEADER.size:
        raise TruncatedMessageError(f"CERT rdata of {len(rdata)} octets is shorter than its 5-octet header")
    cert_type, key_tag, algorithm = CERT_HEADER.unpack_from(rdata)
    return CertRecordData(cert_type, key_tag, algorithm, bytes(rdata[CERT_HEADER.size:]))


def _parse_number(token: str, field: str, maximum: int) -> int:
    if not (token.isascii() and token.isdigit()):
        raise PresentationError(f"{field} {token!r} is neither a mnemonic nor a decimal integer")
    value = int(token)
    if value > maximum:
        raise PresentationError(f"{field} {value} outside 0-{maximum}")
    return value


def _parse_mnemonic(token: str, table: dict, field: str, maximum: int) -> int:
    if token.isascii() and token.isdigit():
        return _parse_number(token, field, maximum)
    try:
        return table[token.upper()]
    except KeyError:
        raise UnknownMnemonicError(f"unknown {field} mnemonic {token!r}")


def parse_cert_presentation(text: str) -> CertRecordData:
    """
    Parse the RDATA part of a CERT master-file entry

    Type and algorithm may be mnemonics or decimal integers. The base64 payload
    may be wrapped in parentheses and split by any whitespace.

    Args:
        text: e.g. 'PKIX 30132 RSAMD5 ( MIIFhz... )'

    Returns:
        CertRecordData
    """
    tokens = text.replace('(', ' ').replace(')', ' ').split()
    if len(tokens) < 4:
        raise PresentationError(f"CERT data needs type, key tag, algorithm and payload, got {len(tokens)} fields")

    cert_type = _parse_mnemonic(tokens[0], _CERT_TYPE_VALUES, 'certificate type', 0xFFFF)
    key_tag = _parse_number(tokens[1], 'key tag', 0xFFFF)
    algorithm = _parse_mnemonic(tokens[2], _ALGORITHM_VALUES, 'algorithm', 0xFF)

    try:
        payload = base64.b64decode(''.join(tokens[3:]), validate=True)
    except ValueError as e:  # binascii.Error, or non-ASCII input
        raise InvalidBase64Error(f"invalid base64 certificate payload: {e}")

    return CertRecordData(cert_type, key_tag, algorithm, payload)


def format_cert_presentation(owner: DomainName, ttl: int, data: CertRecordData,
                             absolute: bool = False) -> str:
    """
    Render one CERT record as master-file text

    Args:
        owner: Owner name
        ttl: TTL in seconds
        data: Record data
        absolute: Write the owner with its trailing dot (zone files need this)

    Returns:
        'owner ttl IN CERT <type> <tag> <alg> (' followed by the base64
        payload in 64-character lines and a closing ' )'
    """
    body = base64.b64encode(data.payload).decode('ascii')
    lines = [body[i:i + BASE64_LINE_WIDTH] for i in range(0, len(body), BASE64_LINE_WIDTH)]
    header = (
        f"{owner.to_text(absolute=absolute)} {ttl} IN CERT "
        f"{data.type_text} {data.key_tag} {data.algorithm_text} ("
    )
    return header + ''.join(f"\n\t{line}" for line in lines) + " )"
