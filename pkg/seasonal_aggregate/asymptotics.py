"""
Asymptotic uncertainty of Whittle estimates.

- Fisher information of the log-spectrum gradient
- Normal-theory intervals, including linear functionals and σ
- Parametric frequency-domain bootstrap
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, stats

from .errors import BootstrapError, InputError, NumericError
from .model import DiffOrders, ModelOrders, ModelParams, SeasonalSpec, SpectrumConfig
from .quadrature import composite_rule
from .sample import Periodogram, as_series, fourier_frequencies
from .spectra import ModelDensity, SpectrumKind, spectral_density
from .whittle import FitResult, Parameterization, WhittleObjective, minimize_objective

logger = logging.getLogger(__name__)

SIGMA2 = "sigma2"
TOTAL_MEMORY = "d+ΣD"
RELATIVE_STEP = 1e-5
SYMMETRY_TOLERANCE = 1e-10
SINGULAR_TOLERANCE = 1e-10
MIN_REPLICATES = 50
MAX_FAILURE_FRACTION = 0.2


@dataclass
class InformationMatrix:
    """
    Fisher information Γ over named coordinates.

    Coordinates are ordered d, D.j (estimated components), ar.j.i, ma.j.i,
    phi.i, theta.i, sigma2. ``null_space`` holds an orthonormal basis of the
    non-identifiable directions (empty when Γ is non-singular).
    """

    names: List[str]
    matrix: np.ndarray
    null_space: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def __post_init__(self):
        gamma = np.asarray(self.matrix, dtype=float)
        if gamma.shape != (len(self.names), len(self.names)):
            raise InputError(f"information matrix shape {gamma.shape} does not match {len(self.names)} names")
        asym = np.max(np.abs(gamma - gamma.T)) if gamma.size else 0.0
        if asym > SYMMETRY_TOLERANCE * max(1.0, np.max(np.abs(gamma))):
            raise NumericError(f"information matrix is not symmetric (max deviation {asym:.3g})")
        self.matrix = 0.5 * (gamma + gamma.T)

    @property
    def singular(self) -> bool:
        return self.null_space.size > 0

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown coordinate {name!r}; have {self.names}") from None

    def covariance(self, n: int = 1) -> np.ndarray:
        """Γ^{-1}/n (pseudo-inverse when Γ is singular)."""
        inv = np.linalg.pinv(self.matrix) if self.singular else np.linalg.inv(self.matrix)
        return inv / n

    def standard_errors(self, n: int = 1) -> Dict[str, float]:
        cov = self.covariance(n)
        return {name: float(np.sqrt(max(cov[i, i], 0.0))) for i, name in enumerate(self.names)}

    def linear_se(self, weights: Mapping[str, float], n: int = 1) -> float:
        """Standard error of Σ w_i θ_i using the full covariance."""
        a = np.zeros(len(self.names))
        for name, w in weights.items():
            a[self.index(name)] = w
        return float(np.sqrt(max(a @ self.covariance(n) @ a, 0.0)))

    def degenerate(self, weights: Mapping[str, float]) -> bool:
        """True when the functional has a component along the null space."""
        if not self.singular:
            return False
        a = np.zeros(len(self.names))
        for name, w in weights.items():
            a[self.index(name)] = w
        return bool(np.linalg.norm(self.null_space.T @ a) > 1e-8 * max(1.0, np.linalg.norm(a)))

    def permuted(self, names: Sequence[str]) -> "InformationMatrix":
        """Same information with coordinates reordered (P Γ Pᵀ)."""
        idx = [self.index(n) for n in names]
        null = self.null_space[idx, :] if self.singular else self.null_space
        return InformationMatrix(list(names), self.matrix[np.ix_(idx, idx)], null)


def _log_density(density: ModelDensity, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        values = density.unit(x, check=False)
    out = np.log(values)
    if not np.all(np.isfinite(out)):
        raise NumericError("log spectrum undefined at quadrature nodes")
    return out


def _gradient(
    density: ModelDensity,
    param: Parameterization,
    x0: np.ndarray,
    i: int,
    nodes: np.ndarray,
) -> np.ndarray:
    """∂ log f / ∂θ_i at the nodes: central differences with one Richardson step."""
    h = RELATIVE_STEP * max(abs(x0[i]), 1.0)

    def central(step: float) -> np.ndarray:
        up, down = x0.copy(), x0.copy()
        up[i] += step
        down[i] -= step
        f_up = _log_density(density.with_params(param.from_natural(up)), nodes)
        f_down = _log_density(density.with_params(param.from_natural(down)), nodes)
        return (f_up - f_down) / (2.0 * step)

    coarse = central(h)
    fine = central(0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def information_nodes(density: ModelDensity) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature on (0, π) graded toward every lattice frequency of the density."""
    points = [(p, 0.0) for p, _ in density.singular_points]
    return composite_rule(points)


def fisher_information(
    theta: ModelParams,
    R: Optional[DiffOrders],
    spec: SeasonalSpec,
    cfg: Optional[SpectrumConfig] = None,
    kind: Optional[SpectrumKind] = None,
    orders: Optional[ModelOrders] = None,
    free: Optional[Sequence[str]] = None,
) -> InformationMatrix:
    """
    Γ(θ) = (1/4π) ∫_{-π}^{π} ∇log f ∇log fᵀ dω over θ = (ξ, σ²).

    Args:
        theta: Parameters (interior of the constraint set)
        R: Differencing orders
        spec: Seasonal structure
        cfg: Spectrum settings
        kind: Density family (limiting aggregate by default)
        orders: ARMA orders (inferred from theta when None)
        free: Subset of coordinate names to include (all when None)

    Returns:
        InformationMatrix; a singular Γ is logged and carries its null space
    """
    kind = kind or SpectrumKind.limiting_aggregate()
    if orders is None:
        orders = ModelOrders(
            P=tuple(len(theta.seasonal_ar(j)) for j in range(spec.c)),
            Q=tuple(len(theta.seasonal_ma(j)) for j in range(spec.c)),
            p=len(theta.regular_ar),
            q=len(theta.regular_ma),
        )
    param = Parameterization(spec, orders, kind)
    density = spectral_density(kind, theta, R, spec, cfg)
    names = param.names + [SIGMA2]
    selected = list(free) if free is not None else names
    unknown = [n for n in selected if n not in names]
    if unknown:
        raise InputError(f"unknown coordinates {unknown}; have {names}")

    nodes, weights = information_nodes(density)
    x0 = param.natural(theta)
    grads = []
    for name in selected:
        if name == SIGMA2:
            grads.append(np.full(nodes.size, 1.0 / theta.sigma2))
        else:
            grads.append(_gradient(density, param, x0, param.names.index(name), nodes))
    G = np.vstack(grads)
    gamma = (G * weights) @ G.T / (2.0 * np.pi)

    eigvals, eigvecs = linalg.eigh(0.5 * (gamma + gamma.T))
    if eigvals.size and eigvals[0] < -SINGULAR_TOLERANCE * max(1.0, eigvals[-1]):
        raise NumericError(f"information matrix has a negative eigenvalue {eigvals[0]:.3g}")
    small = eigvals <= SINGULAR_TOLERANCE * max(1.0, eigvals[-1] if eigvals.size else 1.0)
    null = eigvecs[:, small]
    if null.size:
        logger.warning(
            "information matrix is singular; non-identifiable directions over %s: %s",
            selected, np.round(null.T, 6).tolist(),
        )
    return InformationMatrix(selected, gamma, null)


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Confidence interval for one named quantity."""

    name: str
    estimate: float
    lower: float
    upper: float
    se: Optional[float] = None
    flag: str = ""


def normal_interval(estimate: float, se: float, level: float = 0.95) -> Tuple[float, float]:
    """estimate ± z_{(1+level)/2}·se."""
    if not 0.0 < level < 1.0:
        raise InputError(f"level must lie in (0, 1), got {level}")
    half = stats.norm.ppf(0.5 + 0.5 * level) * se
    return estimate - half, estimate + half


def _functionals(names: Sequence[str]) -> Dict[str, Dict[str, float]]:
    memory = [n for n in names if n == "d" or n.startswith("D.")]
    out = {n: {n: 1.0} for n in names}
    if len(memory) > 1:
        out[TOTAL_MEMORY] = {n: 1.0 for n in memory}
    return out


def asymptotic_intervals(
    fit: FitResult,
    level: float = 0.95,
    info: Optional[InformationMatrix] = None,
) -> List[Interval]:
    """
    Normal intervals θ̂_i ± z·√((Γ^{-1})_{ii}/N) at the fitted parameters.

    Also reports d + ΣD (full covariance) and σ (delta method from σ²).
    Boundary fits and null-space directions are flagged, not dropped.
    """
    info = info or fisher_information(fit.params, fit.R, fit.spec, fit.cfg, fit.kind, fit.orders)
    estimates = fit.estimates()
    estimates[TOTAL_MEMORY] = fit.params.total_memory
    n = fit.n_used
    boundary = set(fit.boundary)
    if boundary:
        logger.warning("intervals at a boundary estimate (%s) are not valid", ", ".join(sorted(boundary)))

    intervals = []
    for name, weights in _functionals(info.names).items():
        se = info.linear_se(weights, n)
        lo, hi = normal_interval(estimates[name], se, level)
        flag = ""
        if info.degenerate(weights) or se == 0.0:
            flag = "degenerate"
        elif boundary:
            flag = "boundary"
        intervals.append(Interval(name, estimates[name], lo, hi, se, flag))

    if SIGMA2 in info.names:
        sigma2_iv = next(iv for iv in intervals if iv.name == SIGMA2)
        sigma = float(np.sqrt(fit.params.sigma2))
        se_sigma = sigma2_iv.se / (2.0 * sigma)
        lo, hi = normal_interval(sigma, se_sigma, level)
        intervals.append(Interval("sigma", sigma, lo, hi, se_sigma, sigma2_iv.flag))
    return intervals


# ---------------------------------------------------------------------------
# Bootstrap
# ---------------------------------------------------------------------------

@dataclass
class BootstrapResult:
    """Replicate estimates and percentile intervals."""

    names: List[str]
    draws: np.ndarray
    intervals: List[Interval]
    replicates: int
    failures: int

    def mean(self) -> Dict[str, float]:
        return dict(zip(self.names, (float(v) for v in self.draws.mean(axis=0))))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Generator of replicate ``index``, independent of execution order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def parametric_bootstrap(
    fit: FitResult,
    data: Sequence[float],
    B: int = 200,
    seed: int = 0,
    level: float = 0.95,
    threads: int = 1,
    maxfev: int = 2000,
) -> BootstrapResult:
    """
    Frequency-domain parametric bootstrap around a fit.

    Each replicate draws I*(ω_j) = f̂(ω_j)·E_j with E_j i.i.d. standard
    exponential and re-minimizes the profiled objective within the fitted
    differencing cell, starting from the fit.

    Args:
        fit: Whittle fit
        data: The series the fit was computed from
        B: Replicate count (>= 50)
        seed: Root seed
        level: Percentile interval level
        threads: Worker threads
        maxfev: Evaluations per replicate

    Returns:
        BootstrapResult

    Raises:
        InputError: If B < 50 or data does not match the fit
        BootstrapError: If more than 20% of replicates fail
    """
    if B < MIN_REPLICATES:
        raise InputError(f"bootstrap needs B >= {MIN_REPLICATES}, got {B}")
    y = as_series(data)
    if y.size < fit.n_used:
        raise InputError(f"series of length {y.size} is shorter than the fitted N={fit.n_used}")

    freqs = fourier_frequencies(fit.n_used)
    density = fit.density()
    f_hat = density(freqs, check=False)
    param = fit.parameterization
    base = Periodogram(freqs, f_hat, fit.n_used)

    def replicate(b: int) -> Optional[np.ndarray]:
        rng = replicate_rng(seed, b)
        ordinates = f_hat * rng.standard_exponential(freqs.size)
        try:
            objective = WhittleObjective(density, base.with_ordinates(ordinates), param)
            params, _, _, _ = minimize_objective(objective, [fit.params], maxfev)
        except (NumericError, InputError) as e:
            logger.info("bootstrap replicate %d failed: %s", b, e)
            return None
        return np.r_[param.natural(params), params.total_memory, params.sigma2]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(replicate, range(B)))
    else:
        results = [replicate(b) for b in range(B)]

    ok = [r for r in results if r is not None]
    failures = B - len(ok)
    if failures > MAX_FAILURE_FRACTION * B:
        raise BootstrapError(f"{failures} of {B} bootstrap replicates failed", failures, B)
    if failures:
        logger.warning("%d of %d bootstrap replicates failed", failures, B)

    names = param.names + [TOTAL_MEMORY, SIGMA2]
    draws = np.vstack(ok)
    estimates = fit.estimates()
    estimates[TOTAL_MEMORY] = fit.params.total_memory
    tail = 50.0 * (1.0 - level)
    lower = np.percentile(draws, tail, axis=0)
    upper = np.percentile(draws, 100.0 - tail, axis=0)
    intervals = [
        Interval(name, estimates[name], float(lo), float(hi), float(np.std(draws[:, i], ddof=1)))
        for i, (name, lo, hi) in enumerate(zip(names, lower, upper))
    ]
    return BootstrapResult(names, draws, intervals, B, failures)
