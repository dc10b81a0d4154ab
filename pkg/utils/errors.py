from typing import Any, Optional


class LabError(Exception):
    """Base class for every error raised by the gSQG lab."""


class DomainError(LabError, ValueError):
    """Argument outside the mathematical domain of an operation (poles, divergent regimes)."""


class PreconditionError(LabError, ValueError):
    """Hypotheses of an estimate are violated by the supplied arguments."""


class ConvergenceError(LabError, ArithmeticError):
    """
    Series did not meet its stopping criterion within the term budget.

    Args:
        message: Human readable description
        partial_sum: Sum accumulated before giving up
        terms_used: Number of terms that were summed
    """

    def __init__(self, message: str, partial_sum: float, terms_used: int):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms_used = terms_used


class AccuracyError(LabError, ArithmeticError):
    """
    Quadrature did not reach the requested tolerance.

    Args:
        message: Human readable description
        best_estimate: Best value obtained
        error_estimate: Error estimate that accompanies best_estimate
    """

    def __init__(self, message: str, best_estimate: float, error_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class CFLViolation(LabError):
    """Time step too large for the current velocity; suggested_dt satisfies the limit."""

    def __init__(self, message: str, suggested_dt: float):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class SimulationAborted(LabError):
    """Simulation produced non-finite values; last_record is the last good diagnostic."""

    def __init__(self, message: str, last_record: Any = None):
        super().__init__(message)
        self.last_record = last_record


class ConfigError(LabError, ValueError):
    """Invalid configuration entry, reported with the offending key and its line (if known)."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = f" (key '{key}'" + (f", line {line})" if line is not None else ")") if key else ""
        super().__init__(f"{message}{location}")
        self.key = key
        self.line = line
