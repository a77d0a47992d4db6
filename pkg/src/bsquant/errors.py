"""Exception hierarchy shared by all modules."""


class BsquantError(Exception):
    """Base class for package errors."""


class DomainError(BsquantError, ValueError):
    """Argument outside the documented domain of a function."""


class ParseError(BsquantError, ValueError):
    """Malformed potential expression.

    ``position`` is the 1-based column of the offending character.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class HypothesisError(BsquantError):
    """A structural hypothesis on the problem was falsified."""


class NumericalError(BsquantError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""


class AccuracyLossError(NumericalError):
    """Internal error estimate exceeds the requested tolerance."""


class ConfigError(BsquantError):
    """Invalid run configuration."""
