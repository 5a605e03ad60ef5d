import numpy as np
import pytest

from seasonal_aggregate.asymptotics import (
    InformationMatrix,
    asymptotic_intervals,
    fisher_information,
    normal_interval,
    parametric_bootstrap,
    replicate_rng,
)
from seasonal_aggregate.errors import InputError, NumericError
from seasonal_aggregate.model import ModelParams, SeasonalSpec
from seasonal_aggregate.spectra import SpectrumKind


class TestFisherInformation:

    def test_innovation_variance(self):
        info = fisher_information(
            ModelParams(d=0.2, sigma2=2.0), None, SeasonalSpec(),
            kind=SpectrumKind.fine_sarfima(), free=["sigma2"],
        )
        assert info.matrix[0, 0] == pytest.approx(1.0 / 8.0, rel=1e-10)

    def test_fractional_noise(self):
        info = fisher_information(
            ModelParams(d=0.2), None, SeasonalSpec(),
            kind=SpectrumKind.fine_sarfima(), free=["d", "sigma2"],
        )
        assert info.names == ["d", "sigma2"]
        assert info.matrix[0, 0] == pytest.approx(np.pi ** 2 / 6.0, rel=1e-6)
        assert info.matrix[0, 1] == pytest.approx(0.0, abs=1e-6)
        assert not info.singular

    def test_limiting_model_names(self):
        info = fisher_information(ModelParams(d=0.1, D=(0.2,)), None, SeasonalSpec(z=(10,)))
        assert info.names == ["d", "D.1", "sigma2"]
        np.testing.assert_allclose(info.matrix, info.matrix.T)
        assert np.all(np.linalg.eigvalsh(info.matrix) > 0)

    def test_unknown_coordinate(self):
        with pytest.raises(InputError):
            fisher_information(ModelParams(d=0.2), None, SeasonalSpec(),
                               kind=SpectrumKind.fine_sarfima(), free=["D.1"])

    @pytest.mark.parametrize("n, expected", [
        (512, (0.03, 0.03, 0.04)),
        (1024, (0.02, 0.02, 0.03)),
    ])
    def test_limiting_model_standard_errors(self, n, expected):
        info = fisher_information(ModelParams(d=-0.1, D=(0.3,), sigma2=4.0), None, SeasonalSpec(z=(10,)))
        se = info.standard_errors(n)
        total = info.linear_se({"d": 1.0, "D.1": 1.0}, n)
        assert (se["d"], se["D.1"], total) == pytest.approx(expected, abs=0.005)


class TestInformationMatrix:

    def test_linear_functional(self):
        info = InformationMatrix(["d", "D.1"], np.diag([4.0, 1.0]))
        assert info.standard_errors()["d"] == pytest.approx(0.5)
        assert info.linear_se({"d": 1.0, "D.1": 1.0}) == pytest.approx(np.sqrt(1.25))
        assert info.linear_se({"d": 1.0}, n=100) == pytest.approx(0.05)

    def test_rejects_asymmetric(self):
        with pytest.raises(NumericError):
            InformationMatrix(["a", "b"], np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_degenerate_direction(self):
        null = np.array([[1.0], [-1.0]]) / np.sqrt(2.0)
        info = InformationMatrix(["a", "b"], np.ones((2, 2)), null)
        assert info.singular
        assert info.degenerate({"a": 1.0})
        assert not info.degenerate({"a": 1.0, "b": 1.0})

    def test_permuted(self):
        info = InformationMatrix(["a", "b"], np.array([[2.0, 0.5], [0.5, 1.0]]))
        swapped = info.permuted(["b", "a"])
        np.testing.assert_allclose(swapped.matrix, [[1.0, 0.5], [0.5, 2.0]])

    def test_unknown_name(self):
        info = InformationMatrix(["a"], np.eye(1))
        with pytest.raises(InputError):
            info.index("b")


class TestIntervals:

    @pytest.mark.parametrize("estimate, se, lower, upper", [
        (0.2326, 0.0436, 0.1471, 0.3181),
        (0.4871, 0.0441, 0.4007, 0.5735),
    ])
    def test_normal_interval(self, estimate, se, lower, upper):
        lo, hi = normal_interval(estimate, se)
        assert lo == pytest.approx(lower, abs=1e-4)
        assert hi == pytest.approx(upper, abs=1e-4)

    def test_bad_level(self):
        with pytest.raises(InputError):
            normal_interval(0.0, 1.0, level=1.0)

    def test_fit_intervals(self, aggregate_fit):
        intervals = {iv.name: iv for iv in asymptotic_intervals(aggregate_fit)}
        assert set(intervals) == {"d", "D.1", "sigma2", "d+ΣD", "sigma"}
        for iv in intervals.values():
            assert iv.lower < iv.estimate < iv.upper
        assert intervals["sigma"].estimate == pytest.approx(np.sqrt(aggregate_fit.sigma2_hat))


class TestBootstrap:

    def test_requires_enough_replicates(self, aggregate_fit, aggregate_series):
        with pytest.raises(InputError):
            parametric_bootstrap(aggregate_fit, aggregate_series, B=10)

    def test_reproducible_across_threads(self, aggregate_fit, aggregate_series):
        serial = parametric_bootstrap(aggregate_fit, aggregate_series, B=50, seed=3, maxfev=300)
        pooled = parametric_bootstrap(aggregate_fit, aggregate_series, B=50, seed=3, maxfev=300, threads=2)
        np.testing.assert_array_equal(serial.draws, pooled.draws)
        assert serial.names == ["d", "D.1", "d+ΣD", "sigma2"]
        assert serial.mean()["sigma2"] == pytest.approx(aggregate_fit.sigma2_hat, rel=0.2)

    def test_centred_on_fit(self, aggregate_fit, aggregate_series):
        boot = parametric_bootstrap(aggregate_fit, aggregate_series, B=60, seed=5)
        assert boot.mean()["sigma2"] == pytest.approx(aggregate_fit.sigma2_hat, rel=0.05)
        asymptotic = {iv.name: iv for iv in asymptotic_intervals(aggregate_fit)}
        for iv in boot.intervals:
            assert iv.lower <= iv.estimate <= iv.upper, iv.name
        for name in ("d", "D.1"):
            spread = next(iv.se for iv in boot.intervals if iv.name == name)
            assert 0.6 < spread / asymptotic[name].se < 1.6, name


def test_replicate_streams_are_independent_of_order():
    first = replicate_rng(11, 4).standard_normal(3)
    replicate_rng(11, 0).standard_normal(100)
    np.testing.assert_array_equal(first, replicate_rng(11, 4).standard_normal(3))
    assert not np.array_equal(first, replicate_rng(11, 5).standard_normal(3))
