import pytest

from seasonal_aggregate.errors import (
    BootstrapError,
    ConvergenceError,
    FitError,
    ForecastError,
    InputError,
    NumericError,
    PoleError,
    SeasonalAggregateError,
    SimulationError,
)


@pytest.mark.parametrize("error, code", [
    (InputError("x"), 2),
    (PoleError("x", [0.0]), 2),
    (NumericError("x"), 3),
    (SimulationError("x"), 3),
    (ForecastError("x", 16), 3),
    (ConvergenceError("x"), 4),
    (FitError("x"), 4),
    (BootstrapError("x", 20, 50), 4),
])
def test_exit_codes(error, code):
    assert isinstance(error, SeasonalAggregateError)
    assert error.exit_code == code


def test_input_error_is_value_error():
    with pytest.raises(ValueError):
        raise InputError("bad")


def test_payloads():
    assert PoleError("pole", [1.0]).frequencies == [1.0]
    assert ForecastError("big", suggested_cap=100).suggested_cap == 100
    assert FitError("all failed", [{"cell": "r=0"}]).diagnostics == [{"cell": "r=0"}]
    err = BootstrapError("too many", failures=11, replicates=50)
    assert (err.failures, err.replicates) == (11, 50)
