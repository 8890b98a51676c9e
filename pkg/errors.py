"""Exceptions raised across the package.

Everything subclasses ValueError so callers that only care about "bad input"
can catch a single type.
"""


class LUEquivError(ValueError):
    """Base class for every error raised by this package."""


class DimensionMismatch(LUEquivError):
    pass


class ModeOutOfRange(LUEquivError):
    pass


class BadDimension(LUEquivError):
    pass


class InvalidState(LUEquivError):
    """A density matrix failed one of its invariants (Hermitian, trace 1, PSD)."""


class ShapeMismatch(LUEquivError):
    pass


class PartyOutOfRange(LUEquivError):
    pass


class NotUnitary(LUEquivError):
    pass


class NotOrthogonal(LUEquivError):
    pass


class WrongArity(LUEquivError):
    """Raised when a representation has the wrong number of parties."""


class WrongDimension(LUEquivError):
    """Raised when a qubit-only routine receives a non-qubit partition."""


class MalformedQuiver(LUEquivError):
    pass


class StateFileError(LUEquivError):
    """Input file could not be parsed. `position` points at the offending spot when known."""

    def __init__(self, message: str, position: str = None):
        self.position = position
        if position:
            message = f"{message} (at {position})"
        super().__init__(message)
