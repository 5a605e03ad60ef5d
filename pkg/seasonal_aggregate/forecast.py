"""
Linear prediction from fitted spectra.

Point forecasts and the full forecast-error covariance of the differenced
series come from the Durbin-Levinson recursion on model autocovariances;
forecasts are integrated back through the differencing filters with the
covariance propagated exactly.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, signal, stats

from .errors import ForecastError, InputError, NumericError
from .model import DiffOrders, ModelOrders, SeasonalSpec, SpectrumConfig
from .sample import (
    as_series,
    differencing_polynomial,
    integration_weights,
    sample_acvf,
    seasonal_difference,
)
from .simulate import MAX_GRID, next_pow2, acvf_from_spectrum
from .spectra import SpectrumKind
from .whittle import FitResult, fit as fit_model

logger = logging.getLogger(__name__)

DEFAULT_HISTORY_CAP = 4096
INNOVATIONS_LIMIT = 512


@dataclass
class ForecastResult:
    """
    h-step forecasts on the original scale.

    Attributes:
        point: ŷ_{N+1..N+h}
        cov: h×h forecast-error covariance
        model: Label of the fitted model
        R: Differencing orders the forecasts were integrated through
        n_history: Differenced observations the predictor conditioned on
    """

    point: np.ndarray
    cov: np.ndarray
    model: str
    R: DiffOrders
    n_history: int

    @property
    def horizon(self) -> int:
        return self.point.size

    @property
    def mse(self) -> np.ndarray:
        return np.clip(np.diag(self.cov), 0.0, None)

    def interval(self, level: float = 0.95) -> Tuple[np.ndarray, np.ndarray]:
        """Gaussian bands point ± z·√MSE."""
        if not 0.0 < level < 1.0:
            raise InputError(f"level must lie in (0, 1), got {level}")
        half = stats.norm.ppf(0.5 + 0.5 * level) * np.sqrt(self.mse)
        return self.point - half, self.point + half


# ---------------------------------------------------------------------------
# Recursions
# ---------------------------------------------------------------------------

def durbin_levinson(gamma: Sequence[float], order: int, keep_from: int = 0) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Prediction coefficients φ_{k,1..k} and one-step MSEs v_0..v_order.

    Args:
        gamma: Autocovariances γ(0..order)
        order: Largest predictor order
        keep_from: Only coefficient vectors for k >= keep_from are returned

    Returns:
        (coefficients for k = keep_from..order, v_0..v_order)

    Raises:
        NumericError: If the recursion meets a non-positive definite sequence
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.size < order + 1:
        raise InputError(f"need {order + 1} autocovariances, got {gamma.size}")
    v = np.empty(order + 1)
    v[0] = gamma[0]
    if v[0] <= 0:
        raise NumericError("autocovariance at lag 0 must be positive")
    phi = np.empty(0)
    kept = [phi.copy()] if keep_from == 0 else []
    for k in range(1, order + 1):
        a = (gamma[k] - phi @ gamma[k - 1:0:-1]) / v[k - 1]
        phi = np.r_[phi - a * phi[::-1], a]
        v[k] = v[k - 1] * (1.0 - a * a)
        if v[k] <= 0:
            raise NumericError(f"autocovariances are not positive definite at order {k}")
        if k >= keep_from:
            kept.append(phi.copy())
    return kept, v


def predict_stationary(x: Sequence[float], gamma: Sequence[float], h: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Best linear predictors of x_{n+1..n+h} and their error covariance.

    P_n x_{n+j} = Σ_i φ_{n+j-1,i} P_n x_{n+j-i}; the errors satisfy
    ε = Φ ε + e with e the one-step innovations, so Cov = A Aᵀ with
    A = (I - Φ)^{-1} diag(√v).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    coeffs, v = durbin_levinson(gamma, n + h - 1, keep_from=n)

    ext = np.concatenate([x, np.zeros(h)])
    for j in range(h):
        phi = coeffs[j]
        t = n + j
        ext[t] = phi @ ext[t - 1::-1][: phi.size]
    point = ext[n:]

    I_minus_phi = np.eye(h)
    for j in range(1, h):
        phi = coeffs[j]
        I_minus_phi[j, :j] = -phi[j - np.arange(j) - 1]
    A = linalg.solve_triangular(I_minus_phi, np.diag(np.sqrt(v[n:n + h])), lower=True, unit_diagonal=True)
    return point, A @ A.T


def innovations_forecast(x: Sequence[float], gamma: Sequence[float], h: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    h-step predictors and MSEs by the innovations algorithm.

    Cubic in the history length; used as a cross-check for n <= 512.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n > INNOVATIONS_LIMIT:
        raise InputError(f"innovations cross-check is limited to {INNOVATIONS_LIMIT} observations")
    gamma = np.asarray(gamma, dtype=float)
    total = n + h
    v = np.empty(total)
    theta: List[np.ndarray] = [np.empty(0)]
    v[0] = gamma[0]
    for m in range(1, total):
        row = np.empty(m)
        for k in range(m):
            acc = gamma[m - k]
            if k:
                acc -= np.sum(theta[k][::-1] * row[m - k:][::-1][:k] * v[:k])
            row[m - k - 1] = acc / v[k]
        theta.append(row)
        v[m] = gamma[0] - np.sum(row[::-1] ** 2 * v[:m])

    xhat = np.zeros(n)
    for m in range(1, n):
        innov = x[m - 1::-1] - xhat[m - 1::-1]
        xhat[m] = theta[m] @ innov[:m]

    resid = x - xhat
    point = np.empty(h)
    mse = np.empty(h)
    for step in range(1, h + 1):
        row = theta[n + step - 1]
        j = np.arange(step, n + step)
        point[step - 1] = np.sum(row[j - 1] * resid[n + step - 1 - j])
        mse[step - 1] = gamma[0] - np.sum(row[j - 1] ** 2 * v[n + step - 1 - j])
    return point, mse


# ---------------------------------------------------------------------------
# Forecasting a fit
# ---------------------------------------------------------------------------

def _check_budget(n: int, h: int) -> None:
    L = next_pow2(8 * (n + h + 1))
    if L > MAX_GRID:
        cap = max(16, MAX_GRID // 8 - h - 1)
        raise ForecastError(
            f"history {n} with horizon {h} needs a grid of {L} points (limit {MAX_GRID}); "
            f"use a history cap of at most {cap}",
            suggested_cap=cap,
        )


def predict(
    data: Sequence[float],
    fit: FitResult,
    h: int,
    cfg: Optional[SpectrumConfig] = None,
    history_cap: int = DEFAULT_HISTORY_CAP,
) -> ForecastResult:
    """
    h-step linear prediction from a fitted model.

    The series is differenced with R̂, demeaned and cut to its last
    ``history_cap`` values; forecasts of the differenced series are
    integrated back to the original scale from the last observations.

    Args:
        data: Observations (the series the model was fitted to, or its extension)
        fit: Fitted model
        h: Horizon >= 1
        cfg: Spectrum settings for the autocovariances (fit.cfg when None)
        history_cap: Largest number of differenced values conditioned on

    Returns:
        ForecastResult

    Raises:
        InputError: If h < 1
        ForecastError: If the autocovariance grid would exceed its memory limit
    """
    if h < 1:
        raise InputError(f"horizon must be >= 1, got {h}")
    y = as_series(data)
    R, spec = fit.R, fit.spec
    u = seasonal_difference(y, R, spec)
    mean = float(np.mean(u))
    x = (u - mean)[-history_cap:]
    n = x.size
    _check_budget(n, h)

    gamma = acvf_from_spectrum(fit.density(), n + h - 1, cfg or fit.cfg)
    point_u, cov_u = predict_stationary(x, gamma, h)
    point_u = point_u + mean

    lags = R.lag_count(spec)
    if lags:
        poly = differencing_polynomial(R, spec)
        zi = signal.lfiltic([1.0], poly, y=y[-lags:][::-1])
        point, _ = signal.lfilter([1.0], poly, point_u, zi=zi)
        psi = integration_weights(R, spec, h)
        Psi = linalg.toeplitz(psi, np.zeros(h))
        cov = Psi @ cov_u @ Psi.T
    else:
        point, cov = point_u, cov_u
    return ForecastResult(np.asarray(point), cov, fit.kind.label, R, n)


def ar_forecast(data: Sequence[float], p: int, h: int) -> ForecastResult:
    """
    h-step forecasts from an AR(p) fitted by Yule-Walker to the demeaned
    series. No differencing and no long memory: a short-memory reference.

    Raises:
        InputError: If p < 1, h < 1 or the series has at most p + 1 values
    """
    if h < 1:
        raise InputError(f"horizon must be >= 1, got {h}")
    if p < 1:
        raise InputError(f"AR order must be >= 1, got {p}")
    y = as_series(data)
    if y.size <= p + 1:
        raise InputError(f"AR({p}) needs more than {p + 1} observations, got {y.size}")
    mean = float(np.mean(y))
    coeffs, v = durbin_levinson(sample_acvf(y, p), p, keep_from=p)
    phi = coeffs[0]

    ext = np.concatenate([y[-p:] - mean, np.zeros(h)])
    for j in range(h):
        t = p + j
        ext[t] = phi @ ext[t - 1::-1][:p]
    impulse = np.zeros(h)
    impulse[0] = 1.0
    psi = signal.lfilter([1.0], np.r_[1.0, -phi], impulse)
    Psi = linalg.toeplitz(psi, np.zeros(h))
    logger.debug("AR(%d) Yule-Walker coefficients %s, innovation variance %.6g", p, phi, v[p])
    return ForecastResult(ext[p:] + mean, v[p] * Psi @ Psi.T, f"AR({p})", DiffOrders(), y.size)


def efficiency_ratio(
    forecasts_a: Sequence[float],
    forecasts_b: Sequence[float],
    actuals: Sequence[float],
) -> np.ndarray:
    """
    100 · Σ_{i<=h} |b_i - y_i| / Σ_{i<=h} |a_i - y_i| for each h.

    a is the proposed model, b the competitor; values above 100 favour a.
    Steps where both cumulative errors are zero give 100; steps where only
    a has zero cumulative error give inf (written as "inf" by the CLI).
    """
    a = np.asarray(forecasts_a, dtype=float)
    b = np.asarray(forecasts_b, dtype=float)
    y = np.asarray(actuals, dtype=float)
    if not a.shape == b.shape == y.shape:
        raise InputError(f"forecast and actual lengths differ ({a.size}, {b.size}, {y.size})")
    err_a = np.cumsum(np.abs(a - y))
    err_b = np.cumsum(np.abs(b - y))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = 100.0 * err_b / err_a
    ratio[(err_a == 0) & (err_b == 0)] = 100.0
    return ratio


@dataclass
class ComparisonResult:
    """Split-sample forecast comparison of two fitted models."""

    ratio: np.ndarray
    proposed: ForecastResult
    competitor: ForecastResult
    actuals: np.ndarray
    fits: List[FitResult] = field(default_factory=list)


def compare_forecasts(
    data: Sequence[float],
    spec: SeasonalSpec,
    n_train: int,
    h: Optional[int] = None,
    cfg: Optional[SpectrumConfig] = None,
    bounds=None,
    proposed_orders: Optional[ModelOrders] = None,
    competitor_kind: Optional[SpectrumKind] = None,
    competitor_orders: Optional[ModelOrders] = None,
    history_cap: int = DEFAULT_HISTORY_CAP,
    threads: int = 1,
    competitor_ar: Optional[int] = None,
) -> ComparisonResult:
    """
    Fit the limiting model and a competitor on data[:n_train], forecast the
    rest, and return the cumulative-MAE efficiency ratio curve.

    The competitor defaults to the SARFIMA density at periods z. With
    ``competitor_ar=p`` it is a Yule-Walker AR(p) instead, and only the
    proposed fit is returned in ``fits``.
    """
    y = as_series(data)
    if not 0 < n_train < y.size:
        raise InputError(f"n_train must lie in 1..{y.size - 1}, got {n_train}")
    h = h or y.size - n_train
    if n_train + h > y.size:
        raise InputError(f"horizon {h} runs past the end of the series")
    train, actuals = y[:n_train], y[n_train:n_train + h]

    proposed_fit = fit_model(train, spec, cfg, bounds, orders=proposed_orders, threads=threads)
    a = predict(train, proposed_fit, h, cfg, history_cap)
    if competitor_ar is not None:
        b = ar_forecast(train, competitor_ar, h)
        return ComparisonResult(efficiency_ratio(a.point, b.point, actuals), a, b, actuals, [proposed_fit])

    competitor_fit = fit_model(
        train, spec.limiting(), cfg, bounds,
        kind=competitor_kind or SpectrumKind.fine_sarfima(),
        orders=competitor_orders, threads=threads,
    )
    b = predict(train, competitor_fit, h, cfg, history_cap)
    ratio = efficiency_ratio(a.point, b.point, actuals)
    return ComparisonResult(ratio, a, b, actuals, [proposed_fit, competitor_fit])
