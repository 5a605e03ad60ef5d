"""
Differencing and periodogram of observed series.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal

from .errors import InputError
from .model import DiffOrders, SeasonalSpec, fracdiff_coeffs


def as_series(values: Sequence[float], name: str = "series") -> np.ndarray:
    """
    Validate observations as a 1-D finite float array.

    Raises:
        InputError: If values are not 1-D or contain NaN/inf
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InputError(f"{name} contains non-finite values")
    return y


def seasonal_difference(y: Sequence[float], R: DiffOrders, spec: SeasonalSpec) -> np.ndarray:
    """
    Apply ∇ r times, then ∇_{z_j} R_j times for each component in order.

    Args:
        y: Observations
        R: Differencing orders
        spec: Seasonal structure (aggregate-scale periods z)

    Returns:
        Differenced series of length len(y) - (r + Σ z_j R_j)

    Raises:
        InputError: If the series cannot absorb the lags
    """
    u = as_series(y)
    lags = R.lag_count(spec)
    if u.size <= lags:
        raise InputError(
            f"series too short: {u.size} observations for {lags} differencing lags"
        )
    for _ in range(R.r):
        u = u[1:] - u[:-1]
    for j, zj in enumerate(spec.z):
        for _ in range(R.seasonal(j)):
            u = u[zj:] - u[:-zj]
    return u


def differencing_polynomial(R: DiffOrders, spec: SeasonalSpec) -> np.ndarray:
    """Coefficients c_0..c_L of (1 - B)^r Π_j (1 - B^{z_j})^{R_j}."""
    poly = fracdiff_coeffs(R.r, R.r)
    for j, zj in enumerate(spec.z):
        Rj = R.seasonal(j)
        if Rj:
            factor = np.zeros(zj * Rj + 1)
            factor[::zj] = fracdiff_coeffs(Rj, Rj)
            poly = np.convolve(poly, factor)
    return poly


def integration_weights(R: DiffOrders, spec: SeasonalSpec, n: int) -> np.ndarray:
    """
    First n coefficients ψ_0..ψ_{n-1} of the inverse differencing filter
    (1 - B)^{-r} Π_j (1 - B^{z_j})^{-R_j}.
    """
    psi = fracdiff_coeffs(-R.r, n - 1)
    for j, zj in enumerate(spec.z):
        Rj = R.seasonal(j)
        if Rj:
            factor = np.zeros(n)
            seasonal = fracdiff_coeffs(-Rj, (n - 1) // zj)
            factor[::zj] = seasonal[: factor[::zj].size]
            psi = np.convolve(psi, factor)[:n]
    return psi


@dataclass(frozen=True)
class DifferencedSeries:
    """Differenced values plus the leading observations needed to undo them."""

    values: np.ndarray
    head: np.ndarray
    R: DiffOrders
    spec: SeasonalSpec


def difference_with_state(y: Sequence[float], R: DiffOrders, spec: SeasonalSpec) -> DifferencedSeries:
    y = as_series(y)
    u = seasonal_difference(y, R, spec)
    return DifferencedSeries(u, y[: R.lag_count(spec)].copy(), R, spec)


def undifference(diff: DifferencedSeries) -> np.ndarray:
    """
    Rebuild the original series by running the inverse differencing
    recursion from the stored leading observations.
    """
    head = diff.head
    if head.size == 0:
        return diff.values.copy()
    poly = differencing_polynomial(diff.R, diff.spec)
    zi = signal.lfiltic([1.0], poly, y=head[::-1])
    tail, _ = signal.lfilter([1.0], poly, diff.values, zi=zi)
    return np.concatenate([head, tail])


def fourier_frequencies(n: int) -> np.ndarray:
    """ω_j = 2πj/n for j = 1..⌊(n-1)/2⌋."""
    T = (n - 1) // 2
    return 2.0 * np.pi * np.arange(1, T + 1) / n


@dataclass(frozen=True)
class Periodogram:
    """Ordinates I_N(ω_j) at the Fourier frequencies in (0, π)."""

    freqs: np.ndarray
    ordinates: np.ndarray
    n: int

    @property
    def T(self) -> int:
        return self.freqs.size

    def with_ordinates(self, ordinates: np.ndarray) -> "Periodogram":
        return Periodogram(self.freqs, np.asarray(ordinates, dtype=float), self.n)


def dft_ordinates(u: Sequence[float]) -> np.ndarray:
    """|Σ_t u_t e^{itω_j}|^2 / (2πN) for every j = 0..N-1."""
    u = as_series(u)
    return np.abs(np.fft.fft(u)) ** 2 / (2.0 * np.pi * u.size)


def periodogram(u: Sequence[float]) -> Periodogram:
    """
    Periodogram of u at ω_j = 2πj/N, j = 1..T, T = ⌊(N-1)/2⌋.

    Raises:
        InputError: If N < 3
    """
    u = as_series(u)
    n = u.size
    if n < 3:
        raise InputError(f"periodogram needs at least 3 observations, got {n}")
    T = (n - 1) // 2
    ordinates = np.abs(np.fft.rfft(u)[1:T + 1]) ** 2 / (2.0 * np.pi * n)
    return Periodogram(fourier_frequencies(n), ordinates, n)


def sample_acvf(u: Sequence[float], max_lag: int) -> np.ndarray:
    """
    Biased sample autocovariances γ̂(0..max_lag) about the sample mean,
    Σ_t (u_t - ū)(u_{t+k} - ū) / N. The biased divisor keeps the sequence
    non-negative definite.

    Raises:
        InputError: If max_lag is negative or not below N
    """
    u = as_series(u)
    n = u.size
    if max_lag < 0 or max_lag >= n:
        raise InputError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")
    x = u - u.mean()
    full = signal.correlate(x, x, mode="full", method="fft")
    return full[n - 1:n + max_lag] / n


def acf(u: Sequence[float], max_lag: int) -> np.ndarray:
    """
    Sample autocorrelations ρ̂(0..max_lag); ρ̂(0) = 1.

    Raises:
        InputError: If max_lag is out of range or the series is constant
    """
    gamma = sample_acvf(u, max_lag)
    if gamma[0] <= 0.0:
        raise InputError("autocorrelation of a constant series is undefined")
    rho = gamma / gamma[0]
    rho[0] = 1.0
    return rho
