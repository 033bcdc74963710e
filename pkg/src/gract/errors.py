"""Exception hierarchy shared by all gract components."""


class GractError(Exception):
    """Base class for all errors raised by this package."""


class RangeError(GractError, IndexError):
    """A position, instant, or ordinal is outside its valid range."""


class NotFoundError(GractError, LookupError):
    """A requested occurrence, entry, or object does not exist."""


class UnknownObjectError(NotFoundError):
    """An object identifier is not part of the indexed universe."""


class FormatError(GractError, ValueError):
    """Serialized data (index file, byte stream, log stream) is malformed."""


class ValidationError(GractError, ValueError):
    """Input data violates a construction precondition."""
