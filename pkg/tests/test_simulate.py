import numpy as np
import pytest
from scipy import special

from seasonal_aggregate.errors import InputError
from seasonal_aggregate.model import ModelParams, SeasonalSpec, SpectrumConfig
from seasonal_aggregate.sample import acf, periodogram
from seasonal_aggregate.simulate import (
    McConfig,
    acvf_from_spectrum,
    gaussian_sample,
    monte_carlo_table,
    simulate_aggregate,
    simulation_density,
)
from seasonal_aggregate.spectra import SpectrumKind, spectral_density


class TestAutocovariances:

    def test_white_noise(self):
        gamma = acvf_from_spectrum(lambda x: np.full_like(x, 1.0 / (2.0 * np.pi)), 20, SpectrumConfig(grid_size=2 ** 12))
        assert gamma[0] == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(gamma[1:], 0.0, atol=1e-12)

    def test_ar1(self):
        f = lambda x: 1.0 / (2.0 * np.pi * (1.25 - np.cos(x)))
        gamma = acvf_from_spectrum(f, 30, SpectrumConfig(grid_size=2 ** 12))
        np.testing.assert_allclose(gamma, 0.5 ** np.arange(31) / 0.75, atol=1e-8)

    def test_fractional_noise(self, small_cfg):
        d = 0.2
        density = spectral_density(SpectrumKind.fine_sarfima(), ModelParams(d=d), None, SeasonalSpec(), small_cfg)
        gamma = acvf_from_spectrum(density, 5, small_cfg)
        assert gamma[0] == pytest.approx(special.gamma(1 - 2 * d) / special.gamma(1 - d) ** 2, rel=1e-5)
        assert gamma[1] / gamma[0] == pytest.approx(d / (1 - d), rel=1e-5)

    def test_non_integrable_pole(self):
        with pytest.raises(InputError):
            acvf_from_spectrum(lambda x: np.abs(x) ** -1.0, 4, singular_points=[(0.0, 1.0)])

    def test_negative_lags(self):
        with pytest.raises(InputError):
            acvf_from_spectrum(lambda x: np.ones_like(x), -1)


class TestGaussianSample:

    def test_white_noise_variance(self):
        gamma = np.zeros(4096)
        gamma[0] = 1.0
        x = gaussian_sample(gamma, 4096, seed=1)
        assert x.shape == (4096,)
        assert np.var(x) == pytest.approx(1.0, abs=0.08)

    def test_seeded(self):
        gamma = 0.5 ** np.arange(64) / 0.75
        np.testing.assert_array_equal(gaussian_sample(gamma, 40, 5), gaussian_sample(gamma, 40, 5))
        assert not np.array_equal(gaussian_sample(gamma, 40, 5), gaussian_sample(gamma, 40, 6))

    def test_ar1_lag_one_correlation(self):
        N = 1024
        gamma = 0.5 ** np.arange(2 * N) / 0.75
        lag1 = [acf(gaussian_sample(gamma, N, seed), 1)[1] for seed in range(20)]
        assert np.mean(lag1) == pytest.approx(0.5, abs=3.0 / np.sqrt(N))

    def test_needs_enough_lags(self):
        with pytest.raises(InputError):
            gaussian_sample(np.ones(3), 10)


class TestMcConfig:

    def test_mismatched_orders(self):
        with pytest.raises(InputError):
            McConfig(D=(0.1, 0.2), z=(10,))

    def test_unknown_fitter(self):
        with pytest.raises(InputError):
            McConfig(fitters=("spline",))

    def test_invalid_memory(self):
        with pytest.raises(InputError):
            McConfig(d=0.3, D=(0.3,))

    def test_burn_in(self):
        assert McConfig(max_order=1).burn_in == 11


class TestSimulateAggregate:

    def test_white_noise_variance(self):
        cfg = McConfig(d=0.0, D=(0.0,), sigma=2.0, z=(10,), m=60, N=2048, replicates=1, seed=1,
                       max_order=1, grid_size=2 ** 14)
        y = simulate_aggregate(cfg)
        assert y.size == 2048 + 11
        assert np.var(y) == pytest.approx(2.0 * np.pi, rel=0.15)

    def test_replicates_are_reproducible(self, mc_config, aggregate_series):
        np.testing.assert_array_equal(simulate_aggregate(mc_config, 0), aggregate_series)
        assert not np.array_equal(simulate_aggregate(mc_config, 1), aggregate_series)

    def test_averaged_periodogram_matches_density(self):
        cfg = McConfig(d=0.2, D=(0.0,), z=(10,), m=60, N=512, replicates=200, seed=4,
                       max_order=1, grid_size=2 ** 16)
        pgrams = [periodogram(simulate_aggregate(cfg, b)) for b in range(cfg.replicates)]
        freqs = pgrams[0].freqs
        average = np.mean([pg.ordinates for pg in pgrams], axis=0)
        middle = (freqs > np.pi / 3) & (freqs < 2 * np.pi / 3)
        ratio = average[middle] / simulation_density(cfg)(freqs[middle])
        assert np.mean(ratio) == pytest.approx(1.0, abs=0.03)
        blocks = ratio[: ratio.size // 8 * 8].reshape(-1, 8).mean(axis=1)
        np.testing.assert_allclose(blocks, 1.0, atol=0.1)


def test_monte_carlo_table_rows():
    cfg = McConfig(N=256, replicates=2, seed=9, max_order=1, grid_size=2 ** 14)
    table = monte_carlo_table(cfg)
    (row,) = table.rows()
    assert row["fitter"] == "limiting"
    assert row["successes"] == 2
    assert {"mean.d", "sd.d", "mean.D.1", "mean.d+ΣD"} <= set(row)


@pytest.mark.slow
@pytest.mark.parametrize("phi1, mean_d, mean_D", [(0.0, -0.101, 0.322), (0.5, -0.092, 0.321)])
def test_monte_carlo_hourly_aggregates(phi1, mean_d, mean_D):
    cfg = McConfig(phi1=phi1, replicates=200, seed=1, max_order=2, grid_size=2 ** 18, threads=4)
    summary = monte_carlo_table(cfg).summaries["limiting"]
    mean, sd = summary.mean(), summary.sd()
    assert mean["d"] == pytest.approx(mean_d, abs=0.015)
    assert mean["D.1"] == pytest.approx(mean_D, abs=0.015)
    assert 0.015 < sd["d"] < 0.045
    assert 0.02 < sd["D.1"] < 0.06
    assert summary.zero_order_fraction >= 0.95


@pytest.mark.slow
def test_monte_carlo_half_day_aggregates():
    cfg = McConfig(d=0.2, D=(0.25,), m=720, N=1024, replicates=200, seed=2,
                   max_order=2, grid_size=2 ** 18, threads=4)
    summary = monte_carlo_table(cfg).summaries["limiting"]
    mean = summary.mean()
    assert mean["d"] == pytest.approx(0.200, abs=0.015)
    assert mean["D.1"] == pytest.approx(0.256, abs=0.015)
    assert mean["d+ΣD"] == pytest.approx(0.456, abs=0.02)
    assert summary.zero_order_fraction >= 0.95
