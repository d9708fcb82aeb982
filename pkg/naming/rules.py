"""
Certificate subject -> owner name mapping

Rules, highest priority first:
    1. a domain name identifying the subject is used as is
    2. an IP address is turned into its inverse (in-addr.arpa / ip6.arpa) name
    3. the host of a URI is used
    4. an e-mail address is translated by replacing '@' with '.'
    5. the DN's domainComponent attributes are joined into a name
"""
import ipaddress
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, List, Optional, Sequence, Tuple
from urllib.parse import urlsplit

from codec.exceptions import InvalidNameError
from codec.names import DomainName
from identity.cert_identity import (
    OID_COMMON_NAME,
    OID_DOMAIN_COMPONENT,
    OID_EMAIL_ADDRESS,
    DnsName,
    IdentitySummary,
    IpAddress,
    Rfc822Name,
    Uri,
)

logger = logging.getLogger(__name__)


class RuleApplied(Enum):
    SUBJECT_DOMAIN_NAME = 'SubjectDomainName'
    INVERSE_IP_NAME = 'InverseIpName'
    URI_DOMAIN_NAME = 'UriDomainName'
    EMAIL_TRANSLATION = 'EmailTranslation'
    RFC2247_DN_MAPPING = 'Rfc2247DnMapping'


class SourceField(Enum):
    SUBJECT = 'Subject'
    SUBJECT_ALT_NAME = 'SubjectAltName'


class NamingProfile(Enum):
    GENERIC = 'generic'
    POLITO = 'polito'   # personal -> SAN e-mail, server -> SAN dNSName


class NamingError(ValueError):
    pass


class InvalidEmailError(NamingError):
    pass


class InvalidIpAddressError(NamingError):
    pass


class NoDcComponentsError(NamingError):
    pass


class NoNameDerivableError(NamingError):
    """No rule yields an owner name: the certificate cannot be published"""


@dataclass(frozen=True)
class NamingDecision:
    owner: DomainName
    rule_applied: RuleApplied
    source_field: SourceField

    def describe(self) -> str:
        return f"{self.owner} {self.rule_applied.value} {self.source_field.value}"


def translate_email(addr: str) -> DomainName:
    """
    Translate an e-mail address into a domain name

    Args:
        addr: e.g. 'marinus.marian@polito.it'

    Returns:
        marinus.marian.polito.it (lowercase; each dot-separated token of the
        local part becomes its own label)
    """
    if addr.count('@') != 1:
        raise InvalidEmailError(f"{addr!r} must contain exactly one '@'")
    local, domain = addr.split('@')
    if not local or not domain:
        raise InvalidEmailError(f"{addr!r} has an empty local part or domain")
    if '"' in local or '\\' in local:
        raise InvalidEmailError(f"quoted or escaped local parts are not supported: {addr!r}")
    return DomainName.from_text(f"{local}.{domain}".lower())


def reverse_email_translation(owner: DomainName, mail_domain: DomainName) -> str:
    """
    Rebuild the e-mail address an owner name was translated from

    Args:
        owner: Owner produced by translate_email
        mail_domain: Registered mail domain suffix, e.g. polito.it

    Returns:
        'local@mail.domain'
    """
    if not owner.is_subdomain_of(mail_domain) or owner == mail_domain:
        raise InvalidEmailError(f"{owner} is not below the mail domain {mail_domain}")
    local_labels = owner.canonical_labels[:len(owner.labels) - len(mail_domain.labels)]
    local = '.'.join(label.decode('ascii') for label in local_labels)
    return f"{local}@{mail_domain}"


def translate_ip(ip: bytes) -> DomainName:
    """
    Inverse domain name of an IPv4 (4 octets) or IPv6 (16 octets) address

    Args:
        ip: Packed address

    Returns:
        e.g. 1.2.0.192.in-addr.arpa, or 32 nibble labels under ip6.arpa
    """
    if len(ip) not in (4, 16):
        raise InvalidIpAddressError(f"IP address must be 4 or 16 octets, got {len(ip)}")
    return DomainName.from_text(ipaddress.ip_address(bytes(ip)).reverse_pointer)


def translate_dn(dn: Sequence[Tuple[str, str]]) -> DomainName:
    """
    Map a DN to a domain name through its domainComponent attributes

    Args:
        dn: (attribute OID, value) pairs, most-specific first

    Returns:
        The DC values joined in DN order, e.g. www.example.com
    """
    components = [value for oid, value in dn if oid == OID_DOMAIN_COMPONENT]
    if not components:
        raise NoDcComponentsError("distinguished name has no DC components")
    for component in components:
        if '.' in component:
            raise NamingError(f"DC component {component!r} holds more than one label")
    return DomainName.from_labels(component.lower() for component in components)


def _hostname(text: str) -> DomainName:
    name = DomainName.from_text(text.lower())
    if not name.is_hostname():
        raise NamingError(f"{text!r} is not a multi-label host name")
    return name


def _ip_literal(text: str) -> Optional[bytes]:
    try:
        return ipaddress.ip_address(text).packed
    except ValueError:
        return None


def _uri_host(uri: str) -> Optional[str]:
    """scheme://[userinfo@]host[:port]/... -> host"""
    try:
        return urlsplit(uri).hostname
    except ValueError:
        return None


Candidate = Tuple[RuleApplied, Callable[[], DomainName]]


def _rule_candidates(domains: List[str], ips: List[bytes], uris: List[str],
                     emails: List[str]) -> Iterator[Candidate]:
    """Rules 1-4 over one source, in priority order"""
    for text in domains:
        yield RuleApplied.SUBJECT_DOMAIN_NAME, lambda text=text: _hostname(text)

    uri_hosts = [host for host in map(_uri_host, uris) if host]
    uri_ips = [packed for packed in map(_ip_literal, uri_hosts) if packed is not None]
    for packed in ips + uri_ips:
        yield RuleApplied.INVERSE_IP_NAME, lambda packed=packed: translate_ip(packed)

    for host in uri_hosts:
        if _ip_literal(host) is None:
            yield RuleApplied.URI_DOMAIN_NAME, lambda host=host: _hostname(host)

    for addr in emails:
        yield RuleApplied.EMAIL_TRANSLATION, lambda addr=addr: translate_email(addr)


def _subject_candidates(identity: IdentitySummary) -> Iterator[Candidate]:
    common_names = identity.subject_values(OID_COMMON_NAME)
    yield from _rule_candidates(
        domains=[cn for cn in common_names if _ip_literal(cn) is None and '://' not in cn],
        ips=[packed for packed in map(_ip_literal, common_names) if packed is not None],
        uris=[cn for cn in common_names if '://' in cn],
        emails=identity.subject_values(OID_EMAIL_ADDRESS),
    )
    # RFC 2247 string order is the reverse of the certificate's RDN order
    most_specific_first = tuple(reversed(identity.subject_dn))
    yield RuleApplied.RFC2247_DN_MAPPING, lambda: translate_dn(most_specific_first)


def _san_candidates(identity: IdentitySummary) -> Iterator[Candidate]:
    yield from _rule_candidates(
        domains=[entry.value for entry in identity.san_of_kind(DnsName) if not entry.value.startswith('*')],
        ips=[entry.octets for entry in identity.san_of_kind(IpAddress)],
        uris=[entry.value for entry in identity.san_of_kind(Uri)],
        emails=[entry.value for entry in identity.san_of_kind(Rfc822Name)],
    )


def _map_polito(identity: IdentitySummary) -> NamingDecision:
    dns_names = identity.san_of_kind(DnsName)
    emails = identity.san_of_kind(Rfc822Name)
    if dns_names:
        # server certificate; a SAN carrying both kinds is treated as a server too
        owner = _hostname(dns_names[0].value)
        return NamingDecision(owner, RuleApplied.SUBJECT_DOMAIN_NAME, SourceField.SUBJECT_ALT_NAME)
    if emails:
        owner = translate_email(emails[0].value)
        return NamingDecision(owner, RuleApplied.EMAIL_TRANSLATION, SourceField.SUBJECT_ALT_NAME)
    raise NoNameDerivableError("POLITO profile needs a SubjectAltName dNSName or rfc822Name")


def map_identity(identity: IdentitySummary,
                 profile: NamingProfile = NamingProfile.GENERIC) -> NamingDecision:
    """
    Decide the owner name of a certificate

    The Subject is examined before the SubjectAltName extension; inside each
    source the first rule that yields a valid name wins.

    Args:
        identity: Output of extract_identity
        profile: GENERIC rule chain, or the POLITO personal/server shortcut

    Returns:
        NamingDecision
    """
    if profile is NamingProfile.POLITO:
        return _map_polito(identity)

    sources = (
        (SourceField.SUBJECT, _subject_candidates(identity)),
        (SourceField.SUBJECT_ALT_NAME, _san_candidates(identity)),
    )
    for source, candidates in sources:
        for rule, derive in candidates:
            try:
                owner = derive()
            except (NamingError, InvalidNameError) as e:
                logger.debug(f"{source.value}/{rule.value} not applicable: {e}")
                continue
            return NamingDecision(owner, rule, source)

    raise NoNameDerivableError("no naming rule applies to this certificate")
