"""
Seasonal Aggregate - spectral modelling of temporally aggregated series
A Python package for fitting, simulating and forecasting aggregates of
seasonal long-memory processes.
"""

__version__ = "0.1.0"

from .errors import (
    SeasonalAggregateError,
    InputError,
    PoleError,
    NumericError,
    ConvergenceError,
    FitError,
)
from .model import (
    SeasonalSpec,
    ModelParams,
    DiffOrders,
    ModelOrders,
    SpectrumConfig,
    validate,
)
from .spectra import (
    SpectrumKind,
    sarfima_spectrum,
    limiting_spectrum,
    aggregate_spectrum,
    normalization_constant,
    spectral_density,
)
from .sample import seasonal_difference, periodogram, acf
from .whittle import fit, select_by_aic, FitResult
from .asymptotics import fisher_information, asymptotic_intervals, parametric_bootstrap
from .simulate import gaussian_sample, McConfig, monte_carlo_table, simulate_aggregate
from .forecast import predict, efficiency_ratio, compare_forecasts
from .ingest import ingest, read_series

__all__ = [
    # Errors
    "SeasonalAggregateError",
    "InputError",
    "PoleError",
    "NumericError",
    "ConvergenceError",
    "FitError",
    # Model description
    "SeasonalSpec",
    "ModelParams",
    "DiffOrders",
    "ModelOrders",
    "SpectrumConfig",
    "validate",
    # Spectra
    "SpectrumKind",
    "sarfima_spectrum",
    "limiting_spectrum",
    "aggregate_spectrum",
    "normalization_constant",
    "spectral_density",
    # Sample statistics
    "seasonal_difference",
    "periodogram",
    "acf",
    # Estimation
    "fit",
    "select_by_aic",
    "FitResult",
    "fisher_information",
    "asymptotic_intervals",
    "parametric_bootstrap",
    # Simulation
    "gaussian_sample",
    "McConfig",
    "monte_carlo_table",
    "simulate_aggregate",
    # Forecasting
    "predict",
    "efficiency_ratio",
    "compare_forecasts",
    # Data
    "ingest",
    "read_series",
]
