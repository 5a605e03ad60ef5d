"""
Spectral density functions.

- Fine-scale SARFIMA density
- Finite-m aggregate density
- Limiting aggregate density with the truncated power sum
- Normalization constant of the limiting density

Every evaluator is vectorized over frequency arrays and accepts scalars.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from .cache import get_cache
from .errors import InputError, NumericError, PoleError
from .model import DiffOrders, ModelParams, SeasonalSpec, SpectrumConfig

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
POLE_TOLERANCE = 1e-12
QUAD_RELATIVE_TOLERANCE = 1e-8

# f is continuous at 0 when d + ΣD = 0; evaluate just beside it
_ORIGIN_SHIFT = 1e-8
_BLOCK_ELEMENTS = 2 ** 22


def _prepare(omega) -> Tuple[np.ndarray, Tuple[int, ...]]:
    w = np.asarray(omega, dtype=float)
    return w.ravel(), w.shape


def _finish(values: np.ndarray, shape: Tuple[int, ...]):
    if shape == ():
        return float(values[0])
    return values.reshape(shape)


def _row_blocks(n_rows: int, n_cols: int) -> Iterator[slice]:
    step = max(1, _BLOCK_ELEMENTS // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(start + step, n_rows))


def _log_abs_sin(x: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """log|scale * sin(x / 2)|."""
    with np.errstate(divide="ignore"):
        return np.log(np.abs(scale * np.sin(0.5 * x)))


def _regularize_origin(w: np.ndarray, total_memory: float) -> np.ndarray:
    if total_memory == 0.0:
        return np.where(np.abs(w) <= POLE_TOLERANCE, _ORIGIN_SHIFT, w)
    return w


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

def arma_transfer(coeffs_ar: Sequence[float], coeffs_ma: Sequence[float], omega):
    """
    |theta(e^{iω})|^2 / |phi(e^{iω})|^2 with phi(z) = 1 - Σ a_k z^k, theta(z) = 1 + Σ b_k z^k.

    Args:
        coeffs_ar: AR coefficients a_1..a_p
        coeffs_ma: MA coefficients b_1..b_q
        omega: Frequency or array of frequencies

    Returns:
        Transfer value(s), same shape as omega

    Raises:
        PoleError: If the AR polynomial vanishes at e^{iω}
    """
    w, shape = _prepare(omega)
    if len(coeffs_ar) == 0 and len(coeffs_ma) == 0:
        return _finish(np.ones_like(w), shape)

    z = np.exp(1j * w)
    num = np.abs(P.polyval(z, np.r_[1.0, np.asarray(coeffs_ma, dtype=float)])) ** 2
    den = np.abs(P.polyval(z, np.r_[1.0, -np.asarray(coeffs_ar, dtype=float)]))
    bad = den <= 1e-14
    if np.any(bad):
        raise PoleError("AR polynomial vanishes on the unit circle", w[bad])
    return _finish(num / den ** 2, shape)


def _seasonal_arma(params: ModelParams, periods: Sequence[int], w: np.ndarray) -> np.ndarray:
    out = np.ones_like(w)
    for j, p in enumerate(periods):
        ar, ma = params.seasonal_ar(j), params.seasonal_ma(j)
        if ar or ma:
            out *= arma_transfer(ar, ma, p * w)
    return out


def _regular_g(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """g(x) = σ²/(2π) |θ/φ|² of the regular ARMA part."""
    return params.sigma2 / TWO_PI * arma_transfer(params.regular_ar, params.regular_ma, x)


def singular_points(params: ModelParams, periods: Sequence[int]) -> List[Tuple[float, float]]:
    """
    Lattice frequencies 2πk/p in [0, π] with the local order of each.

    The density behaves like |ω - ν|^{-order} near ν; order 2(d + ΣD) at 0
    and the sum of 2 D_j over components sharing ν elsewhere.

    Returns:
        Sorted list of (frequency, order); zero orders included
    """
    orders = {(0, 1): 2.0 * params.total_memory}
    for Dj, p in zip(params.D, periods):
        for k in range(1, p // 2 + 1):
            g = math.gcd(k, p)
            key = (k // g, p // g)
            orders[key] = orders.get(key, 0.0) + 2.0 * Dj
    return sorted((TWO_PI * k / p, order) for (k, p), order in orders.items())


def _pole_mask(w: np.ndarray, params: ModelParams, periods: Sequence[int]) -> np.ndarray:
    aw = np.abs(w)
    mask = np.zeros(w.shape, dtype=bool)
    if params.total_memory > 0:
        mask |= aw <= POLE_TOLERANCE
    for Dj, p in zip(params.D, periods):
        if Dj > 0 and p > 1:
            t = aw * p / TWO_PI
            dist = np.abs(t - np.rint(t)) * TWO_PI / p
            mask |= (dist <= POLE_TOLERANCE) & (aw > POLE_TOLERANCE)
    return mask


def _check_poles(w: np.ndarray, params: ModelParams, periods: Sequence[int]) -> None:
    mask = _pole_mask(w, params, periods)
    if np.any(mask):
        bad = w[mask]
        raise PoleError(
            f"spectrum evaluated at {bad.size} pole frequenc{'y' if bad.size == 1 else 'ies'} "
            f"(first ω={bad[0]:.12g})",
            bad,
        )


# ---------------------------------------------------------------------------
# Fine-scale SARFIMA
# ---------------------------------------------------------------------------

def sarfima_pole_exponents(spec: SeasonalSpec, params: ModelParams) -> List[List[Tuple[float, float]]]:
    """
    Per-component (ν_jk, δ_jk) for k = 1..⌊s_j/2⌋.

    δ_jk = D_j except at the Nyquist pole of an even period, where it is D_j/2.
    """
    out = []
    for Dj, s in zip(params.D, spec.periods):
        tau = s // 2
        rows = []
        for k in range(1, tau + 1):
            nyquist = k == tau and s == 2 * tau
            rows.append((TWO_PI * k / s, Dj / 2.0 if nyquist else Dj))
        out.append(rows)
    return out


def _sarfima_values(params: ModelParams, periods: Sequence[int], w: np.ndarray) -> np.ndarray:
    w = _regularize_origin(w, params.total_memory)
    log_h = np.zeros_like(w)
    # Π_k |(e^{iν}-e^{iω})(e^{-iν}-e^{iω})|^{-2δ_jk} |2 sin(ω/2)|^{-2D_j} = |2 sin(s_j ω/2)|^{-2D_j}
    if params.d != 0.0:
        log_h -= 2.0 * params.d * _log_abs_sin(w, 2.0)
    for Dj, s in zip(params.D, periods):
        if Dj != 0.0:
            log_h -= 2.0 * Dj * _log_abs_sin(s * w, 2.0)
    return (
        np.exp(log_h)
        * _regular_g(params, w)
        * _seasonal_arma(params, periods, w)
    )


def sarfima_spectrum(params: ModelParams, spec: SeasonalSpec, omega):
    """
    Stationary SARFIMA spectral density at the periods ``spec.periods``.

    Args:
        params: Model parameters (regular ARMA included)
        spec: Seasonal structure; s_j = m z_j when m is set, else z_j
        omega: Frequency or array

    Returns:
        Density value(s)

    Raises:
        PoleError: At a pole with positive exponent
    """
    w, shape = _prepare(omega)
    _check_poles(w, params, spec.periods)
    return _finish(_sarfima_values(params, spec.periods, w), shape)


# ---------------------------------------------------------------------------
# Power sum and limiting aggregate density
# ---------------------------------------------------------------------------

def _power_exponent(r: int, d: float) -> float:
    a = 2.0 * r + 2.0 * d + 2.0
    if a <= 1.0:
        raise InputError(f"power sum diverges for r={r}, d={d} (need 2r+2d+1 > 0)")
    return a


def _power_sum(w: np.ndarray, a: float, cfg: SpectrumConfig) -> np.ndarray:
    k = TWO_PI * np.arange(-cfg.M, cfg.M + 1, dtype=float)
    out = np.empty_like(w)
    for sl in _row_blocks(w.size, k.size):
        out[sl] = np.sum(np.abs(w[sl, None] + k) ** (-a), axis=1)
    if cfg.tail_correction:
        edge = TWO_PI * cfg.M
        out += ((edge - w) ** (1.0 - a) + (edge + w) ** (1.0 - a)) / (TWO_PI * (a - 1.0))
    return out


def power_sum(omega, r: int, d: float, cfg: SpectrumConfig):
    """
    Truncated Σ_{k=-M}^{M} |ω + 2kπ|^{-(2r+2d+2)}, with the integral tail
    beyond ±M added when ``cfg.tail_correction`` is on.

    With the tail the truncation error is O(M^{-(2r+2d+2)}); without it,
    O(M^{-(2r+2d+1)}).
    """
    a = _power_exponent(r, d)
    w, shape = _prepare(omega)
    if np.any(np.abs(w) <= POLE_TOLERANCE):
        raise PoleError("power sum evaluated at ω = 0", [0.0])
    return _finish(_power_sum(w, a, cfg), shape)


def _limiting_values(
    params: ModelParams, r: int, z: Sequence[int], w: np.ndarray, cfg: SpectrumConfig
) -> np.ndarray:
    a = _power_exponent(r, params.d)
    w = _regularize_origin(w, params.total_memory)
    log_f = (2.0 * r + 2.0) * _log_abs_sin(w)
    for Dj, zj in zip(params.D, z):
        if Dj != 0.0:
            log_f -= 2.0 * Dj * _log_abs_sin(zj * w)
    return np.exp(log_f) * _seasonal_arma(params, z, w) * _power_sum(w, a, cfg)


def limiting_spectrum_unnorm(
    params: ModelParams, R: DiffOrders, spec: SeasonalSpec, omega, cfg: SpectrumConfig
):
    """
    f*(ω; ξ, R) with the infinite power sum truncated at M.

    Args:
        params: Fractional orders and seasonal ARMA (regular ARMA and σ² unused)
        R: Differencing orders; only r enters the density
        spec: Seasonal structure; poles sit at 2πk/z_j
        omega: Frequency or array
        cfg: Truncation settings

    Returns:
        Unnormalized density value(s)
    """
    w, shape = _prepare(omega)
    _check_poles(w, params, spec.z)
    return _finish(_limiting_values(params, R.r, spec.z, w, cfg), shape)


def normalization_constant(
    params: ModelParams, R: DiffOrders, spec: SeasonalSpec, cfg: SpectrumConfig
) -> float:
    """
    K = 1 / ∫_{-π}^{π} f*(ω) dω.

    Adaptive quadrature on panels split at 0 and every pole; cached per
    (ξ, r, z, M, tail correction).

    Raises:
        NumericError: If the quadrature misses the 1e-8 relative tolerance
    """
    if params.total_memory >= 0.5:
        raise InputError(f"d+ΣD={params.total_memory:.6g} makes f* non-integrable")
    key = ("normalization", params.with_sigma2(1.0), R.r, spec.z, cfg.M, cfg.tail_correction)
    return get_cache().get_or_fetch(key, lambda: _normalization(params, R.r, spec.z, cfg))


def _normalization(params: ModelParams, r: int, z: Sequence[int], cfg: SpectrumConfig) -> float:
    edges = sorted({0.0, np.pi} | {p for p, _ in singular_points(params, z)})

    def integrand(x: float) -> float:
        return float(_limiting_values(params, r, z, np.array([x]), cfg)[0])

    total, error = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        res = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-10, limit=200, full_output=1)
        total += res[0]
        error += res[1]
        if len(res) > 3:
            logger.debug("quad on [%.6g, %.6g]: %s", lo, hi, res[3])

    if not np.isfinite(total) or total <= 0 or error > QUAD_RELATIVE_TOLERANCE * total:
        raise NumericError(
            f"normalization quadrature did not converge (integral={total:.6g}, error={error:.3g})"
        )
    return 1.0 / (2.0 * total)


def limiting_spectrum(
    params: ModelParams, R: DiffOrders, spec: SeasonalSpec, omega, cfg: SpectrumConfig
):
    """Normalized limiting density K f*, integrating to 1 over (-π, π]."""
    K = normalization_constant(params, R, spec, cfg)
    values = limiting_spectrum_unnorm(params, R, spec, omega, cfg)
    return K * values


# ---------------------------------------------------------------------------
# Finite-m aggregate density
# ---------------------------------------------------------------------------

def _aggregate_values(
    params: ModelParams, r: int, m: int, z: Sequence[int], w: np.ndarray
) -> np.ndarray:
    a = _power_exponent(r, params.d)
    w = _regularize_origin(w, params.total_memory)
    h = m // 2
    odd = m % 2 == 1
    k = np.arange(-h, h + 1) if odd else np.arange(-h, h)

    total = np.empty_like(w)
    for sl in _row_blocks(w.size, k.size):
        ws = w[sl]
        kk = k[None, :] if odd else k[None, :] + (ws <= 0.0)[:, None]
        x = ws[:, None] + TWO_PI * kk
        terms = np.abs(2.0 * np.sin(x / (2.0 * m))) ** (-a) * _regular_g(params, x / m)
        total[sl] = terms.sum(axis=1)

    log_pre = (2.0 * r + 2.0) * _log_abs_sin(w, 2.0)
    for Dj, zj in zip(params.D, z):
        if Dj != 0.0:
            log_pre -= 2.0 * Dj * _log_abs_sin(zj * w, 2.0)
    return np.exp(log_pre) / m * _seasonal_arma(params, z, w) * total


def aggregate_spectrum(
    params: ModelParams, R: DiffOrders, m: int, spec: SeasonalSpec, omega
):
    """
    Spectral density of the differenced non-overlapping m-aggregates.

    For odd m = 2h+1 the alias sum runs over k = -h..h; for even m = 2h over
    k = -h+1..h when ω <= 0 and k = -h..h-1 when ω > 0.

    Args:
        params: Full parameter set; regular ARMA and σ² enter through g
        R: Differencing orders; only r enters the density
        m: Aggregation size >= 2
        spec: Seasonal structure (aggregate-scale periods z)
        omega: Frequency or array in (-π, π]

    Returns:
        Density value(s)
    """
    if int(m) < 2:
        raise InputError(f"aggregation size m must be >= 2, got {m}")
    w, shape = _prepare(omega)
    _check_poles(w, params, spec.z)
    return _finish(_aggregate_values(params, R.r, int(m), spec.z, w), shape)


def aggregate_limit_scale(params: ModelParams, R: DiffOrders) -> float:
    """
    Constant c with m^{-(2r+2d+1)} f_m(ω) -> c f*(ω) as m grows:
    c = 2^{2r+2-2ΣD} g(0).
    """
    g0 = float(_regular_g(params, np.array([0.0]))[0])
    return 2.0 ** (2 * R.r + 2 - 2 * sum(params.D)) * g0


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

FINE_SARFIMA = "fine_sarfima"
AGGREGATE_FINITE = "aggregate_finite"
LIMITING_AGGREGATE = "limiting_aggregate"


@dataclass(frozen=True)
class SpectrumKind:
    """One of FineSarfima, AggregateFinite(m), LimitingAggregate."""

    family: str
    m: Optional[int] = None

    def __post_init__(self):
        if self.family not in (FINE_SARFIMA, AGGREGATE_FINITE, LIMITING_AGGREGATE):
            raise InputError(f"unknown spectrum kind {self.family!r}")
        if self.family == AGGREGATE_FINITE:
            if self.m is None or int(self.m) < 2:
                raise InputError(f"AggregateFinite needs m >= 2, got {self.m}")
            object.__setattr__(self, "m", int(self.m))
        elif self.m is not None:
            raise InputError(f"{self.family} takes no aggregation size")

    @classmethod
    def fine_sarfima(cls) -> "SpectrumKind":
        return cls(FINE_SARFIMA)

    @classmethod
    def aggregate_finite(cls, m: int) -> "SpectrumKind":
        return cls(AGGREGATE_FINITE, m)

    @classmethod
    def limiting_aggregate(cls) -> "SpectrumKind":
        return cls(LIMITING_AGGREGATE)

    @classmethod
    def parse(cls, text: str) -> "SpectrumKind":
        """Parse ``limiting``, ``sarfima`` or ``aggregate:<m>``."""
        name, _, arg = text.strip().lower().partition(":")
        if name in ("limiting", LIMITING_AGGREGATE):
            return cls.limiting_aggregate()
        if name in ("sarfima", FINE_SARFIMA):
            return cls.fine_sarfima()
        if name in ("aggregate", AGGREGATE_FINITE):
            if not arg.isdigit():
                raise InputError(f"expected aggregate:<m>, got {text!r}")
            return cls.aggregate_finite(int(arg))
        raise InputError(f"unknown spectrum kind {text!r}")

    @property
    def label(self) -> str:
        if self.family == AGGREGATE_FINITE:
            return f"aggregate:{self.m}"
        return "limiting" if self.family == LIMITING_AGGREGATE else "sarfima"


@dataclass(frozen=True)
class ModelDensity:
    """
    A model spectral density bound to its parameters.

    ``density(ω)`` includes σ² and is linear in it: sarfima and aggregate
    kinds carry σ²/(2π) through g, the limiting kind is σ² f*.
    """

    kind: SpectrumKind
    params: ModelParams
    R: DiffOrders
    spec: SeasonalSpec
    cfg: SpectrumConfig

    @property
    def periods(self) -> Tuple[int, ...]:
        if self.kind.family == FINE_SARFIMA:
            return self.spec.periods
        return self.spec.z

    def with_params(self, params: ModelParams) -> "ModelDensity":
        return replace(self, params=params)

    def _values(self, w: np.ndarray, params: ModelParams) -> np.ndarray:
        family = self.kind.family
        if family == LIMITING_AGGREGATE:
            return params.sigma2 * _limiting_values(params, self.R.r, self.spec.z, w, self.cfg)
        if family == AGGREGATE_FINITE:
            return _aggregate_values(params, self.R.r, self.kind.m, self.spec.z, w)
        return _sarfima_values(params, self.spec.periods, w)

    def __call__(self, omega, check: bool = True):
        w, shape = _prepare(omega)
        if check:
            _check_poles(w, self.params, self.periods)
        return _finish(self._values(w, self.params), shape)

    def unit(self, omega, check: bool = True):
        """Density at σ² = 1 (the shape g̃ profiled by the Whittle objective)."""
        w, shape = _prepare(omega)
        if check:
            _check_poles(w, self.params, self.periods)
        return _finish(self._values(w, self.params.with_sigma2(1.0)), shape)

    def pole_mask(self, omega) -> np.ndarray:
        w, shape = _prepare(omega)
        return _pole_mask(w, self.params, self.periods).reshape(shape)

    @property
    def singular_points(self) -> List[Tuple[float, float]]:
        return singular_points(self.params, self.periods)

    @property
    def poles(self) -> List[Tuple[float, float]]:
        """(frequency, order) in [0, π] where the density is unbounded."""
        return [(p, order) for p, order in self.singular_points if order > 0]


def spectral_density(
    kind: SpectrumKind,
    params: ModelParams,
    R: Optional[DiffOrders],
    spec: SeasonalSpec,
    cfg: Optional[SpectrumConfig] = None,
) -> ModelDensity:
    """
    Bind a spectrum kind to parameters.

    Args:
        kind: Which density family
        params: Model parameters
        R: Differencing orders (zero orders when None)
        spec: Seasonal structure
        cfg: Spectrum settings (defaults when None)

    Returns:
        ModelDensity
    """
    R = R if R is not None else DiffOrders.zero(spec.c)
    return ModelDensity(kind, params, R, spec, cfg or SpectrumConfig())


def frequency_grid(cfg: SpectrumConfig, n: Optional[int] = None) -> np.ndarray:
    """ω_i = π i / n for i = 1..n, in (0, π]."""
    n = n or cfg.grid_size
    return np.pi * np.arange(1, n + 1) / n
