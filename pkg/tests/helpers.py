"""
Test helpers: fixture loading, certificate factory and a tiny DER writer
"""
import os
from datetime import datetime, timezone
from typing import Optional, Sequence, Tuple

from cryptography import x509
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat
from cryptography.x509.oid import NameOID

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'fixtures')

# expected values for the committed fixtures
SERVER = {'file': 'server.der', 'size': 1338, 'key_tag': 48937, 'owner': 'www.polito.it', 'algorithm': 5}
PERSONAL = {'file': 'personal.der', 'size': 1398, 'key_tag': 54874, 'owner': 'marinus.marian.polito.it', 'algorithm': 1}
REPOSITORY = {'file': 'repository.der', 'size': 390, 'key_tag': 49330, 'owner': 'repository.polito.it', 'algorithm': 0}


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def load_fixture(name: str) -> bytes:
    with open(fixture_path(name), 'rb') as f:
        return f.read()


def build_certificate(subject: Sequence[Tuple[x509.ObjectIdentifier, str]] = ((NameOID.COMMON_NAME, 'www.example.org'),),
                      san: Optional[Sequence[x509.GeneralName]] = None,
                      key=None) -> bytes:
    """
    Self-signed v3 certificate with the given subject RDNs (DER order) and SAN

    Returns:
        DER octets
    """
    key = key or ec.generate_private_key(ec.SECP256R1())
    name = x509.Name([x509.NameAttribute(oid, value) for oid, value in subject])
    builder = (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(name)
        .public_key(key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(datetime(2020, 1, 1, tzinfo=timezone.utc))
        .not_valid_after(datetime(2035, 1, 1, tzinfo=timezone.utc))
    )
    if san is not None:
        builder = builder.add_extension(x509.SubjectAlternativeName(list(san)), critical=False)
    return builder.sign(key, hashes.SHA256()).public_bytes(Encoding.DER)


def spki_of(cert_der: bytes) -> bytes:
    """SubjectPublicKeyInfo DER as cryptography sees it"""
    cert = x509.load_der_x509_certificate(cert_der)
    return cert.public_key().public_bytes(Encoding.DER, PublicFormat.SubjectPublicKeyInfo)


# --- minimal DER writer for shapes cryptography refuses to build ---

def der(tag: int, content: bytes) -> bytes:
    size = len(content)
    if size < 0x80:
        length = bytes([size])
    else:
        raw = size.to_bytes((size.bit_length() + 7) // 8, 'big')
        length = bytes([0x80 | len(raw)]) + raw
    return bytes([tag]) + length + content


def seq(*parts: bytes) -> bytes:
    return der(0x30, b''.join(parts))


def der_set(*parts: bytes) -> bytes:
    return der(0x31, b''.join(parts))


def oid(dotted: str) -> bytes:
    arcs = [int(arc) for arc in dotted.split('.')]
    body = bytearray()
    for arc in [arcs[0] * 40 + arcs[1]] + arcs[2:]:
        chunk = [arc & 0x7F]
        arc >>= 7
        while arc:
            chunk.append(0x80 | (arc & 0x7F))
            arc >>= 7
        body += bytes(reversed(chunk))
    return der(0x06, bytes(body))


def attribute(attr_oid: str, value: str, tag: int = 0x13) -> bytes:
    """One single-valued RDN; tag 0x13 PrintableString, 0x0C UTF8, 0x16 IA5, 0x1E BMP"""
    encoded = value.encode('utf-16-be') if tag == 0x1E else value.encode('utf-8')
    return der_set(seq(oid(attr_oid), der(tag, encoded)))


RSA_SPKI = seq(
    seq(oid('1.2.840.113549.1.1.1'), der(0x05, b'')),
    der(0x03, b'\x00' + seq(der(0x02, b'\x00' + bytes(range(0xC1, 0xE1))), der(0x02, b'\x01\x00\x01'))),
)


def minimal_certificate(subject: Sequence[bytes], version: int = 1, extensions: Optional[Sequence[bytes]] = None,
                        signature_oid: str = '1.2.840.113549.1.1.5', spki: bytes = RSA_SPKI) -> bytes:
    """
    Hand-assembled certificate; the signature is filler

    Args:
        subject: RDNs built with attribute()
        version: 1, 2 or 3
        extensions: Extension SEQUENCEs, wrapped in [3] when given
        signature_oid: Signature algorithm
        spki: SubjectPublicKeyInfo DER
    """
    algorithm = seq(oid(signature_oid), der(0x05, b''))
    issuer = seq(attribute('2.5.4.3', 'Test CA'))
    validity = seq(der(0x17, b'200101000000Z'), der(0x17, b'350101000000Z'))
    fields = []
    if version > 1:
        fields.append(der(0xA0, der(0x02, bytes([version - 1]))))
    fields += [der(0x02, b'\x10\x01'), algorithm, issuer, validity, seq(*subject), spki]
    if extensions is not None:
        fields.append(der(0xA3, seq(*extensions)))
    return seq(seq(*fields), algorithm, der(0x03, b'\x00' + b'\x5a' * 64))


def san_extension(*general_names: bytes) -> bytes:
    return seq(oid('2.5.29.17'), der(0x04, seq(*general_names)))
