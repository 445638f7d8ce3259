"""Exception hierarchy shared by all modules."""


class ThermalDragError(Exception):
    """Base class for package errors."""


class DomainError(ThermalDragError, ValueError):
    """An input lies outside the domain where the operation is defined."""


class SpeciesParseError(ThermalDragError, ValueError):
    """A species file is malformed.

    ``location`` names the offending field path (``transitions[1].upper``) or
    ``line N`` for syntax errors.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class GridTooNarrowError(DomainError):
    """Momentum grid does not contain the distribution."""

    def __init__(self, message: str, required_p_max: float):
        self.required_p_max = required_p_max
        super().__init__(f"{message} (need p_max >= {required_p_max:.6g})")


class NumericalError(ThermalDragError, ArithmeticError):
    """A computation produced non-finite values."""
