"""
Exception hierarchy for seasonal-aggregate.

Every exception carries the exit code the CLI uses when it escapes a
subcommand: 2 for bad input, 3 for numerical failures, 4 for optimizer
non-convergence.
"""

from typing import Any, Dict, List, Optional, Sequence


class SeasonalAggregateError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(SeasonalAggregateError, ValueError):
    """Malformed input: files, configuration, parameters or series."""

    exit_code = 2


class PoleError(InputError):
    """A spectrum was evaluated at a pole with a positive exponent."""

    def __init__(self, message: str, frequencies: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.frequencies = list(frequencies or [])


class NumericError(SeasonalAggregateError, ArithmeticError):
    """A numerical procedure failed or produced an unusable value."""

    exit_code = 3


class SimulationError(NumericError):
    """Circulant embedding could not produce a valid covariance factor."""


class ForecastError(NumericError):
    """Forecasting request exceeds what can be computed."""

    def __init__(self, message: str, suggested_cap: Optional[int] = None):
        super().__init__(message)
        self.suggested_cap = suggested_cap


class ConvergenceError(SeasonalAggregateError):
    """An optimizer did not converge and the caller cannot recover."""

    exit_code = 4


class FitError(ConvergenceError):
    """Every cell of a grid search failed."""

    def __init__(self, message: str, diagnostics: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class BootstrapError(ConvergenceError):
    """Too many bootstrap replicates failed to refit."""

    def __init__(self, message: str, failures: int = 0, replicates: int = 0):
        super().__init__(message)
        self.failures = failures
        self.replicates = replicates
