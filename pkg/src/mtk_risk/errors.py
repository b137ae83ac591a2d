"""Exception hierarchy shared by every module.

Each family maps onto one CLI status / exit code:

    ConfigError   -> config_error  (1)
    DomainError   -> domain_error  (2)
    NumericError  -> numeric_error (3)
"""

from __future__ import annotations


class MTKRiskError(Exception):
    """Base class for all library errors."""

    status = "numeric_error"
    exit_code = 3


class ConfigError(MTKRiskError, ValueError):
    status = "config_error"
    exit_code = 1


class DomainError(MTKRiskError, ValueError):
    status = "domain_error"
    exit_code = 2


class NumericError(MTKRiskError, ArithmeticError):
    status = "numeric_error"
    exit_code = 3


class DegenerateInputError(DomainError):
    """Input for which the requested quantity is not unique (e.g. every point fixed)."""


class NotFoundError(DomainError):
    """A bracketing search found no sign change."""


class CoverageError(DomainError):
    """Partition supports leave part of the grid uncovered."""


class OrderingError(DomainError):
    """Interval endpoints given in the wrong order."""


class NearSingularError(NumericError):
    pass


class UndefinedOperatorError(DomainError):
    """An operator is evaluated where its defining denominator vanishes."""


class InfeasibleError(DomainError):
    pass


class DimensionError(ConfigError):
    pass


class InversionError(NumericError):
    pass


class DivergenceError(NumericError):
    """Orbit norm blew past the cutoff; ``record`` holds the partial orbit."""

    def __init__(self, message: str, record=None):
        super().__init__(message)
        self.record = record


class StructureIndexError(NumericError, ZeroDivisionError):
    """Division by zero in the structure-tensor chain; ``index`` names the culprit (0-based)."""

    def __init__(self, message: str, index: tuple[str, ...] | tuple[int, ...]):
        super().__init__(message)
        self.index = index


class SingularPointError(DomainError):
    """Curve passes through the origin, where the spin vector is undefined."""


class CuspError(DomainError):
    """Tangent vector vanishes."""
