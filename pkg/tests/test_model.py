import numpy as np
import pytest
from scipy import special

from seasonal_aggregate.errors import InputError
from seasonal_aggregate.model import (
    DiffOrders,
    ModelOrders,
    ModelParams,
    SeasonalSpec,
    SpectrumConfig,
    burn_in_length,
    fracdiff_coeffs,
    model_orders_from_kv,
    orders_from_kv,
    params_from_kv,
    params_to_kv,
    spec_from_kv,
    validate,
)


class TestSeasonalSpec:

    def test_fine_periods(self):
        spec = SeasonalSpec(z=(10,), m=60)
        assert spec.c == 1
        assert spec.s == (600,)
        assert spec.periods == (600,)

    def test_limiting_drops_m(self):
        spec = SeasonalSpec(z=(1, 48, 336), m=30).limiting()
        assert spec.m is None
        assert spec.s is None
        assert spec.periods == (1, 48, 336)

    def test_periods_must_increase(self):
        with pytest.raises(InputError):
            SeasonalSpec(z=(10, 5))

    def test_aggregation_size_at_least_two(self):
        with pytest.raises(InputError):
            SeasonalSpec(z=(10,), m=1)


class TestDiffOrders:

    def test_lag_count(self):
        spec = SeasonalSpec(z=(3, 10))
        assert DiffOrders(1, (1, 2), 2).lag_count(spec) == 1 + 3 + 20

    def test_bounded_by_k(self):
        with pytest.raises(InputError):
            DiffOrders(3, (0,), 2)
        with pytest.raises(InputError):
            DiffOrders(0, (3,), 2)

    def test_zero(self):
        R = DiffOrders.zero(2)
        assert R.is_zero
        assert R.R == (0, 0)

    def test_burn_in(self):
        assert burn_in_length(SeasonalSpec(z=(10,)), 2) == 22
        assert burn_in_length(SeasonalSpec(z=(1, 48, 336)), 2) == 2 + 2 * (1 + 48 + 336)


class TestValidate:

    def test_valid_parameters(self):
        report = validate(ModelParams(d=0.2, D=(0.25,)), SeasonalSpec(z=(10,)))
        assert report.ok
        assert report.errors == []

    def test_total_memory_too_large(self):
        report = validate(ModelParams(d=0.3, D=(0.3,)), SeasonalSpec(z=(10,)))
        assert not report.ok
        assert any("d+ΣD ≥ 1/2" in e for e in report.errors)

    def test_negative_total_memory(self):
        report = validate(ModelParams(d=-0.4, D=(0.1,)), SeasonalSpec(z=(10,)))
        assert any("d+ΣD < 0" in e for e in report.errors)

    def test_ar_root_inside_unit_circle(self):
        params = ModelParams(d=0.1, D=(0.1,), ar=((1.05,),))
        report = validate(params, SeasonalSpec(z=(10,)))
        assert any("AR root on/inside unit circle" in e for e in report.errors)

    def test_common_ar_ma_root(self):
        params = ModelParams(d=0.1, D=(0.1,), ar=((0.5,),), ma=((-0.5,),))
        report = validate(params, SeasonalSpec(z=(10,)))
        assert any("common AR/MA root" in e for e in report.errors)

    def test_unit_period_confounded_with_d(self):
        report = validate(ModelParams(d=0.1, D=(0.1, 0.1)), SeasonalSpec(z=(1, 10)))
        assert any("confounded" in e for e in report.errors)

    def test_wrong_number_of_seasonal_orders(self):
        report = validate(ModelParams(d=0.1, D=(0.1,)), SeasonalSpec(z=(5, 10)))
        assert not report.ok

    def test_cross_component_cancellation_is_a_warning(self):
        # 1 - 0.5B on component 1 (period 1) against 1 + (-0.5)B on the regular MA
        params = ModelParams(d=0.1, D=(0.0, 0.1), ar=((0.5,),), regular_ma=(-0.5,))
        report = validate(params, SeasonalSpec(z=(1, 10)))
        assert report.ok
        assert report.warnings


class TestFracdiff:

    def test_leading_coefficients(self):
        c = fracdiff_coeffs(0.4, 1)
        assert c[0] == 1.0
        assert c[1] == pytest.approx(-0.4, abs=1e-15)

    def test_matches_gamma_ratio(self):
        d = 0.3
        k = 5
        expected = special.gamma(k - d) / (special.gamma(k + 1) * special.gamma(-d))
        assert fracdiff_coeffs(d, k)[k] == pytest.approx(expected, rel=1e-12)

    def test_integer_orders(self):
        np.testing.assert_allclose(fracdiff_coeffs(1, 3), [1.0, -1.0, 0.0, 0.0])
        np.testing.assert_allclose(fracdiff_coeffs(2, 2), [1.0, -2.0, 1.0])
        np.testing.assert_allclose(fracdiff_coeffs(-1, 4), np.ones(5))


class TestKeyValue:

    def test_params_from_flat_keys(self):
        params = params_from_kv({"d": "0.2", "D.1": "0.25", "ar.1": "[0.9]", "sigma2": "2.5"}, c=1)
        assert params.d == 0.2
        assert params.D == (0.25,)
        assert params.ar == ((0.9,),)
        assert params.sigma2 == 2.5

    def test_params_render(self):
        items = dict(params_to_kv(ModelParams(d=0.2, D=(0.25,), regular_ar=(0.5,), sigma2=4.0)))
        assert items["d"] == "0.2"
        assert items["D.1"] == "0.25"
        assert items["phi"] == "[0.5]"
        assert items["sigma2"] == "4.0"

    def test_index_beyond_components(self):
        with pytest.raises(InputError):
            params_from_kv({"D.2": 0.1}, c=1)

    def test_bad_index(self):
        with pytest.raises(InputError):
            params_from_kv({"D.x": 0.1})

    def test_spec_and_orders(self):
        spec = spec_from_kv({"z": "[1, 48, 336]", "m": "none"})
        assert spec.z == (1, 48, 336)
        assert spec.m is None
        R = orders_from_kv({"r": "1", "R.3": "1"}, spec.c, K=2)
        assert R == DiffOrders(1, (0, 0, 1), 2)
        orders = model_orders_from_kv({"ar_order.1": 2, "ma_order.1": 2}, spec.c)
        assert orders == ModelOrders(P=(2, 0, 0), Q=(2, 0, 0))


class TestSpectrumConfig:

    def test_defaults(self):
        cfg = SpectrumConfig()
        assert cfg.M == 50
        assert cfg.tail_correction is True

    def test_rejects_bad_truncation(self):
        with pytest.raises(InputError):
            SpectrumConfig(M=0)
