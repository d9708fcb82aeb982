"""
Identity extraction from X.509v3 certificates

Walks just enough of the DER structure to recover the subject DN, the
SubjectAltName entries, the SubjectPublicKeyInfo and the signature algorithm.
No signature, validity or chain checks are performed.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from identity.der import (
    TAG_BIT_STRING,
    TAG_BMP_STRING,
    TAG_BOOLEAN,
    TAG_IA5_STRING,
    TAG_INTEGER,
    TAG_NUMERIC_STRING,
    TAG_OCTET_STRING,
    TAG_OID,
    TAG_PRINTABLE_STRING,
    TAG_SEQUENCE,
    TAG_SET,
    TAG_T61_STRING,
    TAG_UNIVERSAL_STRING,
    TAG_UTF8_STRING,
    TAG_VISIBLE_STRING,
    MalformedDerError,
    Tlv,
    decode_oid,
    expect,
    read_tlv,
)

logger = logging.getLogger(__name__)

# Attribute type OIDs
OID_COMMON_NAME = '2.5.4.3'
OID_COUNTRY = '2.5.4.6'
OID_ORGANIZATION = '2.5.4.10'
OID_ORGANIZATIONAL_UNIT = '2.5.4.11'
OID_DOMAIN_COMPONENT = '0.9.2342.19200300.100.1.25'
OID_EMAIL_ADDRESS = '1.2.840.113549.1.9.1'
OID_SUBJECT_ALT_NAME = '2.5.29.17'

ATTRIBUTE_SHORT_NAMES = {
    OID_COMMON_NAME: 'CN',
    OID_COUNTRY: 'C',
    OID_ORGANIZATION: 'O',
    OID_ORGANIZATIONAL_UNIT: 'OU',
    OID_DOMAIN_COMPONENT: 'DC',
    OID_EMAIL_ADDRESS: 'emailAddress',
}

# GeneralName context tags
GN_RFC822_NAME = 1
GN_DNS_NAME = 2
GN_URI = 6
GN_IP_ADDRESS = 7

_ASCII_STRING_TAGS = {TAG_PRINTABLE_STRING, TAG_IA5_STRING, TAG_NUMERIC_STRING, TAG_VISIBLE_STRING}
_UNSUPPORTED_STRING_TAGS = {
    TAG_BMP_STRING: 'BMPString',
    TAG_T61_STRING: 'T61String',
    TAG_UNIVERSAL_STRING: 'UniversalString',
}


class NotACertificateError(MalformedDerError):
    """Well-formed DER that does not have the X.509 Certificate shape"""


class UnsupportedEncodingError(ValueError):
    """Subject attribute in a string type outside the supported set"""


@dataclass(frozen=True)
class Rfc822Name:
    value: str


@dataclass(frozen=True)
class DnsName:
    value: str


@dataclass(frozen=True)
class Uri:
    value: str


@dataclass(frozen=True)
class IpAddress:
    octets: bytes


SanEntry = Union[Rfc822Name, DnsName, Uri, IpAddress]


@dataclass(frozen=True)
class IdentitySummary:
    """Certificate fields relevant to naming and key tags"""
    subject_dn: Tuple[Tuple[str, str], ...]   # (OID, value) in certificate order
    san_entries: Tuple[SanEntry, ...]
    spki_der: bytes
    der_size: int
    version: int = 3
    signature_algorithm: str = ''
    has_subject_alt_name: bool = False
    warnings: Tuple[str, ...] = ()

    def subject_values(self, oid: str) -> List[str]:
        return [value for attribute, value in self.subject_dn if attribute == oid]

    def san_of_kind(self, kind: type) -> List[SanEntry]:
        return [entry for entry in self.san_entries if isinstance(entry, kind)]

    def describe(self) -> List[str]:
        """Line-oriented dump for operator debugging"""
        lines = [f"version: v{self.version}", f"der_size: {self.der_size}"]
        for oid, value in self.subject_dn:
            lines.append(f"subject: {attribute_name(oid)}={value}")
        for entry in self.san_entries:
            lines.append(f"san: {san_text(entry)}")
        lines.append(f"spki_size: {len(self.spki_der)}")
        lines.append(f"signature_algorithm: {self.signature_algorithm}")
        lines.extend(f"warning: {warning}" for warning in self.warnings)
        return lines


def attribute_name(oid: str) -> str:
    return ATTRIBUTE_SHORT_NAMES.get(oid, oid)


def san_text(entry: SanEntry) -> str:
    if isinstance(entry, Rfc822Name):
        return f"rfc822Name={entry.value}"
    if isinstance(entry, DnsName):
        return f"dNSName={entry.value}"
    if isinstance(entry, Uri):
        return f"URI={entry.value}"
    return f"iPAddress={entry.octets.hex()}"


def _ascii(element: Tlv, what: str) -> str:
    try:
        return element.value.decode('ascii')
    except UnicodeDecodeError:
        raise MalformedDerError(f"{what} at offset {element.start} is not ASCII")


def _decode_attribute_value(oid: str, element: Tlv) -> str:
    if element.tag_class == 0 and element.tag in _UNSUPPORTED_STRING_TAGS:
        raise UnsupportedEncodingError(
            f"RDN {attribute_name(oid)} is a {_UNSUPPORTED_STRING_TAGS[element.tag]}, "
            f"only PrintableString, UTF8String and IA5String are supported"
        )
    if element.is_universal(TAG_UTF8_STRING):
        try:
            return element.value.decode('utf-8')
        except UnicodeDecodeError:
            raise MalformedDerError(f"invalid UTF8String in RDN {attribute_name(oid)}")
    if element.tag_class == 0 and element.tag in _ASCII_STRING_TAGS:
        return _ascii(element, f"RDN {attribute_name(oid)}")
    raise UnsupportedEncodingError(f"RDN {attribute_name(oid)} has unsupported value type ({element.describe()})")


def _parse_name(name: Tlv) -> Tuple[Tuple[str, str], ...]:
    expect(name, TAG_SEQUENCE, 'Name SEQUENCE')
    attributes = []
    for rdn in name.children():
        expect(rdn, TAG_SET, 'RelativeDistinguishedName SET')
        for atv in rdn.children():
            expect(atv, TAG_SEQUENCE, 'AttributeTypeAndValue')
            parts = list(atv.children())
            if len(parts) != 2:
                raise MalformedDerError(f"AttributeTypeAndValue at offset {atv.start} has {len(parts)} parts")
            oid = decode_oid(expect(parts[0], TAG_OID, 'attribute type').value)
            attributes.append((oid, _decode_attribute_value(oid, parts[1])))
    return tuple(attributes)


def _parse_general_names(extension_value: bytes) -> Tuple[SanEntry, ...]:
    names = expect(read_tlv(extension_value, 0, len(extension_value)), TAG_SEQUENCE, 'GeneralNames')
    entries: List[SanEntry] = []
    for general_name in names.children():
        if general_name.tag_class != 2 or general_name.constructed:
            continue
        if general_name.tag == GN_RFC822_NAME:
            entries.append(Rfc822Name(_ascii(general_name, 'rfc822Name')))
        elif general_name.tag == GN_DNS_NAME:
            entries.append(DnsName(_ascii(general_name, 'dNSName')))
        elif general_name.tag == GN_URI:
            entries.append(Uri(_ascii(general_name, 'URI')))
        elif general_name.tag == GN_IP_ADDRESS:
            if len(general_name.value) not in (4, 16):
                raise MalformedDerError(f"iPAddress of {len(general_name.value)} octets")
            entries.append(IpAddress(general_name.value))
        # otherName, x400Address, directoryName, ediPartyName, registeredID: skipped
    return tuple(entries)


def _find_subject_alt_name(extensions: Tlv) -> Optional[Tuple[SanEntry, ...]]:
    sequence = expect(_first_child(extensions, 'Extensions SEQUENCE'), TAG_SEQUENCE, 'Extensions SEQUENCE')
    for extension in sequence.children():
        expect(extension, TAG_SEQUENCE, 'Extension')
        parts = list(extension.children())
        if len(parts) not in (2, 3):
            raise MalformedDerError(f"Extension at offset {extension.start} has {len(parts)} parts")
        oid = decode_oid(expect(parts[0], TAG_OID, 'extnID').value)
        if len(parts) == 3:
            expect(parts[1], TAG_BOOLEAN, 'critical flag')
        value = expect(parts[-1], TAG_OCTET_STRING, 'extnValue')
        if oid == OID_SUBJECT_ALT_NAME:
            return _parse_general_names(value.value)
    return None


def _first_child(element: Tlv, what: str) -> Tlv:
    child = next(element.children(), None)
    if child is None:
        raise NotACertificateError(f"{what} missing")
    return child


def extract_identity(cert_der: bytes) -> IdentitySummary:
    """
    Extract the naming-relevant fields of a DER certificate

    Args:
        cert_der: DER-encoded X.509 certificate

    Returns:
        IdentitySummary
    """
    cert_der = bytes(cert_der)
    if not cert_der:
        raise MalformedDerError("empty input")

    certificate = read_tlv(cert_der, 0, len(cert_der))
    if certificate.end != len(cert_der):
        raise MalformedDerError(f"{len(cert_der) - certificate.end} trailing octets after the certificate")
    if not certificate.is_universal(TAG_SEQUENCE):
        raise NotACertificateError(f"outer element is not a SEQUENCE ({certificate.describe()})")

    top = list(certificate.children())
    if len(top) != 3 or not top[0].is_universal(TAG_SEQUENCE) or not top[2].is_universal(TAG_BIT_STRING):
        raise NotACertificateError("expected tbsCertificate, signatureAlgorithm and signature")
    signature_algorithm = list(expect(top[1], TAG_SEQUENCE, 'signatureAlgorithm').children())
    if not signature_algorithm:
        raise NotACertificateError("empty signatureAlgorithm")
    signature_oid = decode_oid(expect(signature_algorithm[0], TAG_OID, 'signature algorithm OID').value)

    fields = list(top[0].children())
    index = 0
    version = 1
    if fields and fields[0].is_context(0):
        version_int = expect(_first_child(fields[0], 'version INTEGER'), TAG_INTEGER, 'version INTEGER')
        version = int.from_bytes(version_int.value, 'big') + 1
        index = 1

    # serialNumber, signature, issuer, validity, subject, subjectPublicKeyInfo
    required = fields[index:index + 6]
    if len(required) != 6:
        raise NotACertificateError("tbsCertificate is missing mandatory fields")
    serial, _, issuer, validity, subject, spki = required
    expect(serial, TAG_INTEGER, 'serialNumber')
    expect(issuer, TAG_SEQUENCE, 'issuer')
    expect(validity, TAG_SEQUENCE, 'validity')
    expect(spki, TAG_SEQUENCE, 'subjectPublicKeyInfo')

    subject_dn = _parse_name(subject)

    san_entries: Tuple[SanEntry, ...] = ()
    has_san = False
    for optional in fields[index + 6:]:
        if optional.is_context(3):
            found = _find_subject_alt_name(optional)
            if found is not None:
                san_entries, has_san = found, True

    warnings = []
    if version != 3 and not has_san:
        warnings.append(f"v{version} certificate without SubjectAltName")
        logger.warning(f"Accepted v{version} certificate without SubjectAltName")

    return IdentitySummary(
        subject_dn=subject_dn,
        san_entries=san_entries,
        spki_der=spki.encoded,
        der_size=len(cert_der),
        version=version,
        signature_algorithm=signature_oid,
        has_subject_alt_name=has_san,
        warnings=tuple(warnings),
    )
