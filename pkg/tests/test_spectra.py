import numpy as np
import pytest
from scipy import integrate

from seasonal_aggregate.errors import InputError, PoleError
from seasonal_aggregate.model import DiffOrders, ModelParams, SeasonalSpec, SpectrumConfig
from seasonal_aggregate.spectra import (
    SpectrumKind,
    aggregate_limit_scale,
    aggregate_spectrum,
    arma_transfer,
    limiting_spectrum,
    limiting_spectrum_unnorm,
    normalization_constant,
    power_sum,
    sarfima_pole_exponents,
    sarfima_spectrum,
    singular_points,
    spectral_density,
)

NO_SEASON = SeasonalSpec()


class TestArmaTransfer:

    def test_empty_polynomials(self):
        np.testing.assert_allclose(arma_transfer([], [], np.array([0.0, 1.0, 3.0])), 1.0)

    def test_ar1_at_zero(self):
        assert arma_transfer([0.5], [], 0.0) == pytest.approx(4.0, rel=1e-14)

    def test_ar1_complex_oracle(self):
        w = np.pi / 3
        expected = 1.0 / abs(1.0 - 0.9 * np.exp(1j * w)) ** 2
        assert arma_transfer([0.9], [], w) == pytest.approx(expected, rel=1e-12)

    def test_ma_part(self):
        w = 0.7
        expected = abs(1.0 + 0.4 * np.exp(1j * w)) ** 2
        assert arma_transfer([], [0.4], w) == pytest.approx(expected, rel=1e-12)

    def test_unit_root_raises(self):
        with pytest.raises(PoleError):
            arma_transfer([1.0], [], 0.0)


class TestSarfima:

    def test_white_noise(self):
        params = ModelParams(sigma2=2.0 * np.pi)
        np.testing.assert_allclose(sarfima_spectrum(params, NO_SEASON, np.linspace(0.1, np.pi, 7)), 1.0)

    def test_nyquist_exponent_is_halved(self):
        rows = sarfima_pole_exponents(SeasonalSpec(z=(4,)), ModelParams(D=(0.2,)))
        assert rows == [[(pytest.approx(np.pi / 2), 0.2), (pytest.approx(np.pi), 0.1)]]

    def test_term_by_term(self):
        d, D, s, w = 0.1, 0.2, 12, 0.3
        params = ModelParams(d=d, D=(D,))
        value = sarfima_spectrum(params, SeasonalSpec(z=(s,)), w)

        # Π over seasonal roots written out factor by factor
        z = np.exp(1j * w)
        expected = abs(1.0 - z) ** (-2.0 * d) / (2.0 * np.pi)
        expected *= abs(1.0 - z) ** (-2.0 * D)
        for k in range(1, s // 2 + 1):
            nu = 2.0 * np.pi * k / s
            delta = D / 2.0 if 2 * k == s else D
            expected *= abs((np.exp(1j * nu) - z) * (np.exp(-1j * nu) - z)) ** (-2.0 * delta)
        assert value == pytest.approx(expected, rel=1e-12)

    def test_fractional_noise(self):
        w = 1.0
        value = sarfima_spectrum(ModelParams(d=0.2), NO_SEASON, w)
        assert value == pytest.approx(abs(2.0 * np.sin(w / 2.0)) ** -0.4 / (2.0 * np.pi), rel=1e-12)

    def test_pole_at_origin(self):
        with pytest.raises(PoleError):
            sarfima_spectrum(ModelParams(d=0.2), NO_SEASON, np.array([0.0, 1.0]))

    def test_pole_at_seasonal_frequency(self):
        with pytest.raises(PoleError) as info:
            sarfima_spectrum(ModelParams(D=(0.3,)), SeasonalSpec(z=(10,)), 2.0 * np.pi / 10)
        assert info.value.frequencies

    def test_uses_fine_periods(self):
        params = ModelParams(D=(0.3,))
        coarse = sarfima_spectrum(params, SeasonalSpec(z=(10,)), 0.5)
        fine = sarfima_spectrum(params, SeasonalSpec(z=(10,), m=2), 0.5)
        assert fine == pytest.approx(abs(2.0 * np.sin(10.0 * 0.5)) ** -0.6 / (2.0 * np.pi))
        assert coarse != pytest.approx(fine)


class TestPowerSum:

    def test_closed_form_at_half_pi(self):
        cfg = SpectrumConfig(M=10000)
        assert power_sum(np.pi / 2, 0, 0.0, cfg) == pytest.approx(0.5, rel=1e-8)

    def test_closed_form_at_pi(self):
        cfg = SpectrumConfig(M=10000)
        assert power_sum(np.pi, 0, 0.0, cfg) == pytest.approx(0.25, rel=1e-8)

    def test_untruncated_error_rate(self):
        d, w = 0.2, 1.0
        reference = power_sum(w, 0, d, SpectrumConfig(M=100000, tail_correction=True))
        Ms = np.array([4, 8, 16, 32, 64])
        errors = [abs(power_sum(w, 0, d, SpectrumConfig(M=int(M), tail_correction=False)) - reference)
                  for M in Ms]
        slope = np.polyfit(np.log(Ms), np.log(errors), 1)[0]
        assert slope == pytest.approx(-(2 * d + 1), abs=0.1)

    @pytest.mark.parametrize("r, d", [(0, 0.0), (0, 0.2), (1, 0.1)])
    def test_tail_corrected_error_rate(self, r, d):
        w = 1.0
        reference = power_sum(w, r, d, SpectrumConfig(M=100000))
        Ms = np.array([8, 16, 32, 64])
        errors = [abs(power_sum(w, r, d, SpectrumConfig(M=int(M))) - reference) for M in Ms]
        slope = np.polyfit(np.log(Ms), np.log(errors), 1)[0]
        assert slope == pytest.approx(-(2 * r + 2 * d + 2), abs=0.1)

    def test_tail_correction_improves_truncation(self):
        d, w = 0.2, 1.0
        reference = power_sum(w, 0, d, SpectrumConfig(M=100000))
        with_tail = power_sum(w, 0, d, SpectrumConfig(M=50))
        without = power_sum(w, 0, d, SpectrumConfig(M=50, tail_correction=False))
        assert abs(with_tail - reference) < 0.05 * abs(without - reference)

    def test_divergent_exponent(self):
        with pytest.raises(InputError):
            power_sum(1.0, 0, -0.6, SpectrumConfig())

    def test_origin_is_a_pole(self):
        with pytest.raises(PoleError):
            power_sum(0.0, 0, 0.1, SpectrumConfig())


class TestLimiting:

    def test_white_noise_is_flat(self):
        R = DiffOrders.zero(0)
        w = np.linspace(0.05, np.pi, 11)
        np.testing.assert_allclose(limiting_spectrum_unnorm(ModelParams(), R, NO_SEASON, w, SpectrumConfig(M=1000)),
                                   0.25, rtol=1e-6)
        np.testing.assert_allclose(limiting_spectrum_unnorm(ModelParams(), R, NO_SEASON, w, SpectrumConfig()),
                                   0.25, rtol=1e-4)

    def test_normalization_of_flat_density(self):
        K = normalization_constant(ModelParams(), DiffOrders.zero(0), NO_SEASON, SpectrumConfig(M=2000))
        assert K == pytest.approx(2.0 / np.pi, rel=1e-7)

    def test_normalized_density_integrates_to_one(self):
        params = ModelParams(d=-0.1, D=(0.3,))
        spec = SeasonalSpec(z=(4,))
        R = DiffOrders.zero(1)
        cfg = SpectrumConfig()
        K = normalization_constant(params, R, spec, cfg)
        density = spectral_density(SpectrumKind.limiting_aggregate(), params, R, spec, cfg)
        edges = [0.0, np.pi / 2, np.pi]
        total = sum(
            integrate.quad(lambda x: K * density(x, check=False), a, b, limit=200)[0]
            for a, b in zip(edges[:-1], edges[1:])
        )
        assert 2.0 * total == pytest.approx(1.0, rel=1e-6)
        assert limiting_spectrum(params, R, spec, 1.0, cfg) == pytest.approx(K * density(1.0), rel=1e-14)

    def test_low_frequency_slope(self):
        params = ModelParams(d=0.2, D=(0.25,))
        w = np.array([1e-5, 1e-4])
        f = limiting_spectrum_unnorm(params, DiffOrders.zero(1), SeasonalSpec(z=(10,)), w, SpectrumConfig())
        slope = np.diff(np.log(f))[0] / np.diff(np.log(w))[0]
        assert slope == pytest.approx(-2 * (0.2 + 0.25), abs=0.05)

    def test_seasonal_pole_slope(self):
        params = ModelParams(d=0.2, D=(0.25,))
        nu = 2.0 * np.pi / 10
        gaps = np.array([1e-6, 1e-5])
        f = limiting_spectrum_unnorm(params, DiffOrders.zero(1), SeasonalSpec(z=(10,)), nu + gaps, SpectrumConfig())
        slope = np.diff(np.log(f))[0] / np.diff(np.log(gaps))[0]
        assert slope == pytest.approx(-0.5, abs=0.05)

    def test_only_r_enters(self):
        params = ModelParams(d=0.1, D=(0.2,))
        spec = SeasonalSpec(z=(10,))
        cfg = SpectrumConfig()
        a = limiting_spectrum_unnorm(params, DiffOrders(1, (0,), 2), spec, 1.0, cfg)
        b = limiting_spectrum_unnorm(params, DiffOrders(1, (2,), 2), spec, 1.0, cfg)
        assert a == b

    def test_non_integrable(self):
        with pytest.raises(InputError):
            normalization_constant(ModelParams(d=0.3, D=(0.3,)), DiffOrders.zero(1), SeasonalSpec(z=(10,)),
                                   SpectrumConfig())


class TestAggregate:

    @pytest.mark.parametrize("m", [2, 3, 6, 7])
    def test_white_noise_block_sums(self, m):
        w = np.array([-2.5, -0.4, 0.3, 1.7, np.pi])
        values = aggregate_spectrum(ModelParams(), DiffOrders.zero(0), m, NO_SEASON, w)
        np.testing.assert_allclose(values, m / (2.0 * np.pi), rtol=1e-10)

    def test_ar1_against_autocovariance_sum(self):
        m, phi, w = 3, 0.5, 0.7
        params = ModelParams(regular_ar=(phi,))
        value = aggregate_spectrum(params, DiffOrders.zero(0), m, NO_SEASON, w)

        def fine_acvf(k):
            return phi ** abs(k) / (1.0 - phi ** 2)

        def block_acvf(k):
            return sum(fine_acvf(k * m + i - j) for i in range(m) for j in range(m))

        lags = np.arange(1, 400)
        expected = (block_acvf(0) + 2.0 * sum(block_acvf(k) * np.cos(k * w) for k in lags)) / (2.0 * np.pi)
        assert value == pytest.approx(expected, rel=1e-10)

    def test_converges_to_limit(self):
        params = ModelParams(d=0.1, D=(0.2,))
        spec = SeasonalSpec(z=(4,))
        R = DiffOrders.zero(1)
        w = np.array([1.0, 2.0])
        scale = aggregate_limit_scale(params, R)
        limit = scale * limiting_spectrum_unnorm(params, R, spec, w, SpectrumConfig(M=2000))
        errors = []
        for m in (101, 1001):
            f_m = aggregate_spectrum(params, R, m, spec, w) * m ** (-(2 * 0.1 + 1))
            errors.append(np.max(np.abs(f_m / limit - 1.0)))
        assert errors[1] < errors[0]
        assert errors[1] < 0.02

    def test_simulation_configuration_at_m_720(self):
        params = ModelParams(d=-0.1, D=(0.3,))
        spec = SeasonalSpec(z=(10,))
        R = DiffOrders.zero(1)
        w = np.array([0.3, 1.0, 2.2])
        limit = aggregate_limit_scale(params, R) * limiting_spectrum_unnorm(params, R, spec, w, SpectrumConfig(M=2000))
        f_m = aggregate_spectrum(params, R, 720, spec, w) * 720 ** (-(2 * -0.1 + 1))
        np.testing.assert_allclose(f_m, limit, rtol=0.01)


class TestDensityDispatch:

    def test_parse_labels(self):
        assert SpectrumKind.parse("limiting").label == "limiting"
        assert SpectrumKind.parse("sarfima").label == "sarfima"
        assert SpectrumKind.parse("aggregate:12").m == 12

    def test_parse_rejects_unknown(self):
        with pytest.raises(InputError):
            SpectrumKind.parse("garma")
        with pytest.raises(InputError):
            SpectrumKind.parse("aggregate:x")

    def test_limiting_density_is_linear_in_sigma2(self):
        params = ModelParams(d=0.1, D=(0.2,), sigma2=3.0)
        spec = SeasonalSpec(z=(10,))
        density = spectral_density(SpectrumKind.limiting_aggregate(), params, None, spec)
        unnorm = limiting_spectrum_unnorm(params, DiffOrders.zero(1), spec, 1.0, SpectrumConfig())
        assert density(1.0) == pytest.approx(3.0 * unnorm, rel=1e-14)
        assert density.unit(1.0) == pytest.approx(unnorm, rel=1e-14)

    def test_poles(self):
        params = ModelParams(d=0.1, D=(0.2,))
        density = spectral_density(SpectrumKind.limiting_aggregate(), params, None, SeasonalSpec(z=(4,)))
        assert [p for p, _ in density.poles] == pytest.approx([0.0, np.pi / 2, np.pi])
        assert [o for _, o in density.poles] == pytest.approx([0.6, 0.4, 0.4])
        mask = density.pole_mask(np.array([0.0, 0.5, np.pi / 2]))
        assert mask.tolist() == [True, False, True]

    def test_singular_points_merge_shared_frequencies(self):
        points = dict(singular_points(ModelParams(D=(0.1, 0.2)), (2, 4)))
        assert points[np.pi] == pytest.approx(0.6)
        assert points[np.pi / 2] == pytest.approx(0.4)
        assert points[0.0] == pytest.approx(0.6)
