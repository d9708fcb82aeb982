"""
Domain names: label validation, case-insensitive comparison, text and wire forms
"""
import re
from dataclasses import dataclass
from typing import Iterable, List, Tuple, Union

from codec.exceptions import LabelTooLongError, MalformedLabelError, NameTooLongError

MAX_LABEL_LENGTH = 63
MAX_NAME_LENGTH = 255  # encoded octets, root label included

_HOSTNAME_LABEL = re.compile(rb'^[a-z0-9_]([a-z0-9_-]*[a-z0-9_])?$', re.IGNORECASE)
# \DDD, \X, a label separator, or a run of plain characters
_TEXT_TOKEN = re.compile(r"\\([0-9]{3})|\\(.)|(\.)|([^\\.]+)", re.DOTALL)


@dataclass(frozen=True, eq=False)
class DomainName:
    """
    A validated domain name

    Labels keep the case they were built with so that wire data survives a
    decode/encode cycle unchanged; equality, hashing and text output use the
    lowercase canonical form.
    """
    labels: Tuple[bytes, ...]

    def __post_init__(self):
        labels = tuple(bytes(label) for label in self.labels)
        object.__setattr__(self, 'labels', labels)
        for label in labels:
            if not label:
                raise MalformedLabelError("empty label inside a domain name")
            if len(label) > MAX_LABEL_LENGTH:
                raise LabelTooLongError(
                    f"label of {len(label)} octets exceeds {MAX_LABEL_LENGTH}: {label[:20]!r}..."
                )
        if self.wire_length > MAX_NAME_LENGTH:
            raise NameTooLongError(f"name encodes to {self.wire_length} octets, limit is {MAX_NAME_LENGTH}")

    @classmethod
    def root(cls) -> 'DomainName':
        return cls(())

    @classmethod
    def from_labels(cls, labels: Iterable[Union[str, bytes]]) -> 'DomainName':
        """
        Build a name from individual labels

        Args:
            labels: Labels most-specific first, as str (ASCII) or bytes

        Returns:
            DomainName
        """
        encoded = []
        for label in labels:
            if isinstance(label, str):
                label = _ascii_label(label)
            encoded.append(label)
        return cls(tuple(encoded))

    @classmethod
    def from_text(cls, text: str) -> 'DomainName':
        """
        Parse a dotted name; a trailing dot is optional and '.' alone is the root

        Accepts the escapes to_text writes: \\. and \\\\ inside a label, \\DDD for
        any octet.

        Args:
            text: Name such as 'marinus.marian.polito.it'

        Returns:
            DomainName
        """
        text = text.strip()
        if text in ('', '.'):
            return cls.root()
        return cls(tuple(_parse_labels(text)))

    @property
    def wire_length(self) -> int:
        return sum(len(label) + 1 for label in self.labels) + 1

    @property
    def canonical_labels(self) -> Tuple[bytes, ...]:
        return tuple(label.lower() for label in self.labels)

    def is_root(self) -> bool:
        return not self.labels

    def to_wire(self) -> bytes:
        """Uncompressed wire encoding"""
        out = bytearray()
        for label in self.labels:
            out.append(len(label))
            out += label
        out.append(0)
        return bytes(out)

    def to_text(self, absolute: bool = False) -> str:
        """
        Lowercase presentation form

        Args:
            absolute: Append the trailing root dot

        Returns:
            Dotted name
        """
        if not self.labels:
            return '.'
        text = '.'.join(_label_text(label) for label in self.canonical_labels)
        return text + '.' if absolute else text

    def is_subdomain_of(self, other: 'DomainName') -> bool:
        """True when self equals other or lies below it"""
        mine, theirs = self.canonical_labels, other.canonical_labels
        if len(theirs) > len(mine):
            return False
        return not theirs or mine[-len(theirs):] == theirs

    def is_hostname(self) -> bool:
        """Multi-label name made of letter/digit/hyphen labels"""
        return len(self.labels) >= 2 and all(_HOSTNAME_LABEL.match(label) for label in self.labels)

    def sort_key(self) -> Tuple[bytes, ...]:
        """Canonical DNS ordering: compare labels from the root down"""
        return tuple(reversed(self.canonical_labels))

    def __eq__(self, other):
        if not isinstance(other, DomainName):
            return NotImplemented
        return self.canonical_labels == other.canonical_labels

    def __hash__(self):
        return hash(self.canonical_labels)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"DomainName({self.to_text(absolute=True)!r})"


def _ascii_label(label: str) -> bytes:
    try:
        encoded = label.encode('ascii')
    except UnicodeEncodeError:
        raise MalformedLabelError(f"non-ASCII label {label!r}: internationalized names are not supported")
    if any(octet <= 0x20 or octet == 0x7f for octet in encoded):
        raise MalformedLabelError(f"label {label!r} contains whitespace or control characters")
    return encoded


def _label_text(label: bytes) -> str:
    parts = []
    for octet in label:
        if octet in (0x2e, 0x5c):  # '.' and '\'
            parts.append('\\' + chr(octet))
        elif 0x21 <= octet <= 0x7e:
            parts.append(chr(octet))
        else:
            parts.append(f"\\{octet:03d}")
    return ''.join(parts)


def _parse_labels(text: str) -> List[bytes]:
    labels: List[bytes] = []
    current = bytearray()
    position = 0
    for match in _TEXT_TOKEN.finditer(text):
        if match.start() != position:
            break
        decimal, escaped, dot, run = match.groups()
        if decimal is not None:
            value = int(decimal)
            if value > 0xFF:
                raise MalformedLabelError(f"escape \\{decimal} in {text!r} is not an octet")
            current.append(value)
        elif escaped is not None:
            try:
                current += escaped.encode('ascii')
            except UnicodeEncodeError:
                raise MalformedLabelError(f"non-ASCII escape in {text!r}")
        elif dot is not None:
            labels.append(bytes(current))
            current = bytearray()
        else:
            current += _ascii_label(run)
        position = match.end()
    if position != len(text):
        raise MalformedLabelError(f"dangling backslash at the end of {text!r}")
    if current:
        labels.append(bytes(current))
    return labels
