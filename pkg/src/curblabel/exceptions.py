"""Exception hierarchy shared by all pipeline stages."""


class CurbLabelError(Exception):
    """Base class for every error raised by curblabel."""


class FormatError(CurbLabelError, ValueError):
    """An input file does not follow its binary or text layout."""


class ValidationError(CurbLabelError, ValueError):
    """A value violates a domain invariant (e.g. a non-rigid rotation)."""


class ContractError(CurbLabelError, ValueError):
    """Two inputs that must agree do not (grid mismatch, missing pose, ...)."""


class SchemaError(CurbLabelError, ValueError):
    """An OpenLABEL document does not match the supported subset."""


class ParseError(CurbLabelError, ValueError):
    """Malformed JSON. ``offset`` is the byte offset of the failure."""

    def __init__(self, message, offset):
        super().__init__(message)
        self.offset = offset
