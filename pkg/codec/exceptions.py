"""
Codec error types
"""


class WireFormatError(ValueError):
    """Base class for every encoding/decoding failure"""


class InvalidNameError(WireFormatError):
    """Invalid domain name"""


class LabelTooLongError(InvalidNameError):
    pass


class NameTooLongError(InvalidNameError):
    pass


class MalformedLabelError(InvalidNameError):
    pass


class RdataTooLongError(WireFormatError):
    pass


class SectionCountOverflowError(WireFormatError):
    pass


class TruncatedMessageError(WireFormatError):
    """Input ended before the structure it announced"""


class CompressionLoopError(WireFormatError):
    pass


class ForwardPointerError(CompressionLoopError):
    """Compression pointer to its own offset or later"""


class CountMismatchError(WireFormatError):
    """Header section counts disagree with the message body"""


class EdnsPlacementError(WireFormatError):
    """OPT record outside the additional section, duplicated, or not at the root"""


class EmptyPayloadError(WireFormatError):
    pass


class PresentationError(WireFormatError):
    """Unparseable master-file text"""


class UnknownMnemonicError(PresentationError):
    pass


class InvalidBase64Error(PresentationError):
    pass
