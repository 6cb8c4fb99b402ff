"""Shared exception types."""


class SelmerError(Exception):
    """Base class for all library errors."""


class CapacityError(SelmerError):
    """A configured size limit would be exceeded; the message names the limit."""


class CoverageError(SelmerError):
    """A prime lies outside an instance's coefficient coverage."""

    def __init__(self, message, max_x=None):
        super().__init__(message)
        self.max_x = max_x


class FormatError(SelmerError):
    """A data file violates the documented format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DeligneBoundError(SelmerError):
    """A normalized eigenvalue exceeds the |lambda(p)| <= 2 bound."""

    def __init__(self, message, p=None):
        super().__init__(message)
        self.p = p


class GapError(SelmerError):
    """A coefficient table is missing a prime below its coverage bound."""


class InsufficientDataError(SelmerError):
    """Too few sample points for a fit."""


class AccuracyError(SelmerError):
    """A requested tolerance is unreachable; carries the achieved estimate."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PoleError(SelmerError):
    """Evaluation requested at a pole."""


class ValidationError(SelmerError):
    """Invalid parameters (non-fundamental discriminant, bad grid, ...)."""


class UnknownInstanceError(SelmerError):
    """An instance name not among the built-in families."""
