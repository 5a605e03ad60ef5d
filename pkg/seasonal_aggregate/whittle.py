"""
Spectral (Whittle) maximum likelihood.

The objective is profiled over σ², optimized over ξ inside each integer
differencing cell with Nelder-Mead in a smooth unconstrained
reparameterization, and minimized over the grid of cells.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize, special

from .errors import FitError, InputError, NumericError
from .model import (
    DiffOrders,
    ModelOrders,
    ModelParams,
    SeasonalSpec,
    SpectrumConfig,
    burn_in_length,
)
from .sample import Periodogram, as_series, periodogram, seasonal_difference
from .spectra import LIMITING_AGGREGATE, ModelDensity, SpectrumKind, spectral_density

logger = logging.getLogger(__name__)

DEFAULT_STARTS = (0.05, 0.2, 0.4)
DEFAULT_MAXFEV = 2000
BOUNDARY_TOLERANCE = 1e-4
PENALTY = 1e12
_PACF_LIMIT = 1.0 - 1e-9


# ---------------------------------------------------------------------------
# Profile likelihood
# ---------------------------------------------------------------------------

def _check_model_values(I: np.ndarray, gtilde: np.ndarray) -> None:
    if I.shape != gtilde.shape:
        raise InputError(f"periodogram and model lengths differ ({I.size} vs {gtilde.size})")
    if not np.all(np.isfinite(gtilde)) or np.any(gtilde <= 0):
        raise NumericError("model spectrum must be finite and strictly positive")


def profile_sigma2(I: Union[Periodogram, Sequence[float]], gtilde: Sequence[float]) -> float:
    """
    σ̂² = (1/T) Σ_j I(ω_j) / g̃(ω_j).

    Raises:
        NumericError: If g̃ has non-positive or non-finite entries
    """
    ordinates = I.ordinates if isinstance(I, Periodogram) else np.asarray(I, dtype=float)
    gtilde = np.asarray(gtilde, dtype=float)
    _check_model_values(ordinates, gtilde)
    return float(np.mean(ordinates / gtilde))


def whittle_objective(I: Sequence[float], gtilde: Sequence[float]) -> float:
    """Σ log g̃ + T log Σ(I/g̃) + T - T log T."""
    I = np.asarray(I, dtype=float)
    gtilde = np.asarray(gtilde, dtype=float)
    _check_model_values(I, gtilde)
    T = I.size
    ratio = np.sum(I / gtilde)
    if ratio <= 0:
        raise InputError("periodogram is identically zero")
    return float(np.sum(np.log(gtilde)) + T * np.log(ratio) + T - T * np.log(T))


# ---------------------------------------------------------------------------
# Reparameterization
# ---------------------------------------------------------------------------

def pacf_to_coeffs(rho: Sequence[float]) -> np.ndarray:
    """Partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    phi = np.empty(0)
    for r in rho:
        phi = np.r_[phi - r * phi[::-1], r]
    return phi


def coeffs_to_pacf(phi: Sequence[float]) -> np.ndarray:
    """Inverse of pacf_to_coeffs (step-down recursion)."""
    phi = np.array(phi, dtype=float)
    rho = np.empty(phi.size)
    for k in range(phi.size - 1, -1, -1):
        r = phi[k]
        rho[k] = r
        if abs(r) >= 1.0:
            raise InputError(f"AR polynomial {list(phi)} is not stationary")
        phi = (phi[:k] + r * phi[:k][::-1]) / (1.0 - r * r)
    return rho


def _ar_from_free(v: np.ndarray) -> Tuple[float, ...]:
    return tuple(pacf_to_coeffs(np.tanh(v)))


def _ma_from_free(v: np.ndarray) -> Tuple[float, ...]:
    return tuple(-pacf_to_coeffs(np.tanh(v)))


def _free_from_ar(coeffs: Sequence[float], order: int) -> np.ndarray:
    padded = np.zeros(order)
    padded[: len(coeffs)] = list(coeffs)[:order]
    rho = np.clip(coeffs_to_pacf(padded), -_PACF_LIMIT, _PACF_LIMIT)
    return np.arctanh(rho)


def _free_from_ma(coeffs: Sequence[float], order: int) -> np.ndarray:
    return _free_from_ar([-c for c in coeffs], order)


def _logit_half(x: float) -> float:
    x = min(max(2.0 * x, 1e-12), 1.0 - 1e-12)
    return float(special.logit(x))


@dataclass(frozen=True)
class Parameterization:
    """
    Free parameters of one model and their unconstrained coordinates.

    Optimizer coordinates: v_0 with d + ΣD = expit(v_0)/2, u_j with
    D_j = expit(u_j)/2 for each estimated component, then tanh-mapped
    partial autocorrelations for every AR and MA polynomial. Components with
    z_j = 1 keep D_j = 0.
    """

    spec: SeasonalSpec
    orders: ModelOrders = field(default_factory=ModelOrders)
    kind: SpectrumKind = field(default_factory=SpectrumKind.limiting_aggregate)

    @property
    def free_components(self) -> Tuple[int, ...]:
        return tuple(j for j, zj in enumerate(self.spec.z) if zj != 1)

    @property
    def uses_regular_arma(self) -> bool:
        return self.kind.family != LIMITING_AGGREGATE

    def _arma_blocks(self) -> List[Tuple[str, int, Optional[int]]]:
        blocks = []
        for j in range(self.spec.c):
            blocks.append(("ar", self.orders.seasonal_p(j), j))
            blocks.append(("ma", self.orders.seasonal_q(j), j))
        if self.uses_regular_arma:
            blocks.append(("phi", self.orders.p, None))
            blocks.append(("theta", self.orders.q, None))
        return [b for b in blocks if b[1] > 0]

    @property
    def names(self) -> List[str]:
        names = ["d"] + [f"D.{j + 1}" for j in self.free_components]
        for kind, order, j in self._arma_blocks():
            if j is None:
                names += [f"{kind}.{i}" for i in range(1, order + 1)]
            else:
                names += [f"{kind}.{j + 1}.{i}" for i in range(1, order + 1)]
        return names

    @property
    def dim(self) -> int:
        return len(self.names)

    def _assemble(self, d: float, D: Dict[int, float], arma: Dict[Tuple[str, Optional[int]], Tuple[float, ...]],
                  sigma2: float) -> ModelParams:
        c = self.spec.c
        n_arma = max([0] + [j + 1 for (kind, j) in arma if j is not None])
        return ModelParams(
            d=d,
            D=tuple(D.get(j, 0.0) for j in range(c)),
            ar=tuple(arma.get(("ar", j), ()) for j in range(n_arma)),
            ma=tuple(arma.get(("ma", j), ()) for j in range(n_arma)),
            regular_ar=arma.get(("phi", None), ()),
            regular_ma=arma.get(("theta", None), ()),
            sigma2=sigma2,
        )

    def to_params(self, v: Sequence[float], sigma2: float = 1.0) -> ModelParams:
        """Map optimizer coordinates to ModelParams."""
        v = np.asarray(v, dtype=float)
        total = 0.5 * special.expit(v[0])
        free = self.free_components
        D = {j: 0.5 * special.expit(v[1 + i]) for i, j in enumerate(free)}
        pos = 1 + len(free)
        arma = {}
        for kind, order, j in self._arma_blocks():
            chunk = v[pos:pos + order]
            pos += order
            arma[(kind, j)] = _ar_from_free(chunk) if kind in ("ar", "phi") else _ma_from_free(chunk)
        return self._assemble(total - sum(D.values()), D, arma, sigma2)

    def from_params(self, params: ModelParams) -> np.ndarray:
        """Optimizer coordinates of params (clamped into the open constraint set)."""
        v = [_logit_half(params.total_memory)]
        v += [_logit_half(params.D[j] if j < len(params.D) else 0.0) for j in self.free_components]
        for kind, order, j in self._arma_blocks():
            coeffs = self._coeffs(params, kind, j)
            v += list(_free_from_ar(coeffs, order) if kind in ("ar", "phi") else _free_from_ma(coeffs, order))
        return np.asarray(v, dtype=float)

    @staticmethod
    def _coeffs(params: ModelParams, kind: str, j: Optional[int]) -> Tuple[float, ...]:
        if kind == "ar":
            return params.seasonal_ar(j)
        if kind == "ma":
            return params.seasonal_ma(j)
        return params.regular_ar if kind == "phi" else params.regular_ma

    def natural(self, params: ModelParams) -> np.ndarray:
        """Parameter values in ``names`` order."""
        x = [params.d] + [params.D[j] for j in self.free_components]
        for kind, order, j in self._arma_blocks():
            coeffs = list(self._coeffs(params, kind, j)) + [0.0] * order
            x += coeffs[:order]
        return np.asarray(x, dtype=float)

    def from_natural(self, x: Sequence[float], sigma2: float = 1.0) -> ModelParams:
        x = np.asarray(x, dtype=float)
        free = self.free_components
        D = {j: float(x[1 + i]) for i, j in enumerate(free)}
        pos = 1 + len(free)
        arma = {}
        for kind, order, j in self._arma_blocks():
            arma[(kind, j)] = tuple(float(c) for c in x[pos:pos + order])
            pos += order
        return self._assemble(float(x[0]), D, arma, sigma2)

    def start(self, total_memory: float) -> ModelParams:
        """Start with d and every estimated D_j sharing total_memory equally."""
        share = total_memory / (len(self.free_components) + 1)
        D = {j: share for j in self.free_components}
        return self._assemble(share, D, {}, 1.0)

    def boundary_flags(self, params: ModelParams, tol: float = BOUNDARY_TOLERANCE) -> List[str]:
        """Names of constraints the estimate sits within tol of."""
        flags = []
        total = params.total_memory
        if total < tol or total > 0.5 - tol:
            flags.append("d+ΣD")
        if params.d < -0.5 + tol:
            flags.append("d")
        for j in self.free_components:
            if params.D[j] < tol or params.D[j] > 0.5 - tol:
                flags.append(f"D.{j + 1}")
        for kind, order, j in self._arma_blocks():
            coeffs = self._coeffs(params, kind, j)
            if kind in ("ma", "theta"):
                coeffs = [-c for c in coeffs]
            rho = coeffs_to_pacf(coeffs) if coeffs else np.empty(0)
            if np.any(np.abs(rho) > 1.0 - tol):
                flags.append(kind if j is None else f"{kind}.{j + 1}")
        return flags


# ---------------------------------------------------------------------------
# Objective
# ---------------------------------------------------------------------------

def check_fourier_grid(freqs: np.ndarray, periods: Sequence[int], components: Sequence[int], n: int) -> None:
    """
    Raise when a Fourier frequency coincides with a seasonal pole 2πk/z_j.

    Raises:
        NumericError: With guidance to change the series length by one
    """
    j_idx = np.arange(1, freqs.size + 1)
    for j in components:
        p = periods[j]
        if p > 1 and np.any((j_idx * p) % n == 0):
            raise NumericError(
                f"Fourier frequencies of a length-{n} series hit the poles of period {p}; "
                f"change N by ±1 (e.g. drop the first observation)"
            )


class WhittleObjective:
    """
    Profiled Whittle objective of one differencing cell as a function of
    optimizer coordinates.
    """

    def __init__(self, density: ModelDensity, pgram: Periodogram, param: Parameterization):
        self.density = density
        self.pgram = pgram
        self.param = param
        self.evaluations = 0
        if np.sum(pgram.ordinates) <= 0:
            raise InputError("periodogram is identically zero")
        check_fourier_grid(pgram.freqs, density.periods, param.free_components, pgram.n)

    def gtilde(self, params: ModelParams) -> np.ndarray:
        return self.density.with_params(params).unit(self.pgram.freqs, check=False)

    def value(self, params: ModelParams) -> float:
        return whittle_objective(self.pgram.ordinates, self.gtilde(params))

    def __call__(self, v: np.ndarray) -> float:
        self.evaluations += 1
        params = self.param.to_params(v)
        if params.d <= -0.5:
            return PENALTY * (1.0 - params.d)
        with np.errstate(all="ignore"):
            g = self.gtilde(params)
        if not np.all(np.isfinite(g)) or np.any(g <= 0):
            return PENALTY
        T = g.size
        ratio = np.sum(self.pgram.ordinates / g)
        return float(np.sum(np.log(g)) + T * np.log(ratio) + T - T * np.log(T))


def neg_objective(
    xi: ModelParams,
    R: DiffOrders,
    data: Sequence[float],
    spec: SeasonalSpec,
    cfg: Optional[SpectrumConfig] = None,
    kind: Optional[SpectrumKind] = None,
    n_used: Optional[int] = None,
) -> float:
    """
    Profiled negative Whittle log-likelihood of ξ in cell R.

    Args:
        xi: Parameters (σ² ignored)
        R: Differencing cell
        data: Observations; differenced by R, then cut to the last n_used values
        spec: Seasonal structure
        cfg: Spectrum settings
        kind: Density family (limiting aggregate by default)
        n_used: Number of differenced values to use (all when None)

    Returns:
        Σ log g̃ + T log Σ(I/g̃) + T - T log T
    """
    kind = kind or SpectrumKind.limiting_aggregate()
    u = seasonal_difference(data, R, spec)
    if n_used is not None:
        u = u[-n_used:]
    pgram = periodogram(u)
    density = spectral_density(kind, xi, R, spec, cfg)
    check_fourier_grid(pgram.freqs, density.periods, range(spec.c), pgram.n)
    return whittle_objective(pgram.ordinates, density.unit(pgram.freqs))


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------

@dataclass
class CellResult:
    """Outcome of one differencing cell."""

    R: DiffOrders
    params: Optional[ModelParams] = None
    objective: float = float("inf")
    converged: bool = False
    boundary: List[str] = field(default_factory=list)
    evaluations: int = 0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.params is not None and np.isfinite(self.objective)

    def label(self) -> str:
        return f"r={self.R.r} R={list(self.R.R)}"

    def diagnostics(self) -> Dict[str, Any]:
        return {
            "cell": self.label(),
            "objective": self.objective,
            "converged": self.converged,
            "boundary": ",".join(self.boundary) or "-",
            "evaluations": self.evaluations,
            "message": self.message,
        }


def minimize_objective(
    objective: WhittleObjective,
    starts: Sequence[ModelParams],
    maxfev: int = DEFAULT_MAXFEV,
) -> Tuple[ModelParams, float, bool, str]:
    """
    Nelder-Mead from each start; the best local minimum wins.

    Returns:
        (params with σ̂², objective, converged, message)
    """
    param = objective.param
    best = None
    for start in starts:
        x0 = param.from_params(start)
        f0 = objective(x0)
        simplex = np.vstack([x0, x0 + 0.5 * np.eye(x0.size)])
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": maxfev,
                "xatol": 1e-6,
                "fatol": 1e-9 * max(1.0, abs(f0)) if np.isfinite(f0) else 1e-9,
                "initial_simplex": simplex,
            },
        )
        if best is None or res.fun < best.fun:
            best = res

    params = param.to_params(best.x)
    if best.fun >= PENALTY:
        raise NumericError("objective undefined at every start")
    sigma2 = profile_sigma2(objective.pgram, objective.gtilde(params))
    return params.with_sigma2(sigma2), float(best.fun), bool(best.success), str(best.message)


def _cell_series(y: np.ndarray, R: DiffOrders, spec: SeasonalSpec, n_used: Optional[int]) -> np.ndarray:
    u = seasonal_difference(y, R, spec)
    return u[-n_used:] if n_used is not None else u


def optimize_cell(
    R: DiffOrders,
    data: Sequence[float],
    spec: SeasonalSpec,
    cfg: Optional[SpectrumConfig] = None,
    init: Optional[ModelParams] = None,
    kind: Optional[SpectrumKind] = None,
    orders: Optional[ModelOrders] = None,
    n_used: Optional[int] = None,
    starts: Sequence[float] = DEFAULT_STARTS,
    maxfev: int = DEFAULT_MAXFEV,
) -> CellResult:
    """
    Local Whittle estimate of ξ in the cell with r = R.r.

    The cell constraint is 0 <= d + ΣD < 1/2 with 0 <= D_j < 1/2, enforced
    through the logistic reparameterization.

    Args:
        R: Differencing cell (r is the cell's integer order)
        data: Observations
        spec: Seasonal structure
        cfg: Spectrum settings
        init: Optional extra starting point
        kind: Density family (limiting aggregate by default)
        orders: ARMA orders
        n_used: Differenced values used (all when None)
        starts: Total memory levels of the default starting points
        maxfev: Objective evaluations per start

    Returns:
        CellResult; non-convergence is recorded, not raised
    """
    kind = kind or SpectrumKind.limiting_aggregate()
    orders = orders or ModelOrders()
    cfg = cfg or SpectrumConfig()
    param = Parameterization(spec, orders, kind)

    y = as_series(data)
    u = _cell_series(y, R, spec, n_used)
    pgram = periodogram(u)
    density = spectral_density(kind, param.start(0.2), R, spec, cfg)
    objective = WhittleObjective(density, pgram, param)

    start_params = [param.start(s) for s in starts]
    if init is not None:
        start_params.insert(0, init)

    params, value, converged, message = minimize_objective(objective, start_params, maxfev)
    boundary = param.boundary_flags(params)
    if not converged:
        logger.info("cell r=%d R=%s did not converge: %s", R.r, list(R.R), message)
    return CellResult(
        R=R,
        params=params,
        objective=value,
        converged=converged,
        boundary=boundary,
        evaluations=objective.evaluations,
        message=message,
    )


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    """
    Global Whittle fit.

    ``neg_loglik`` is the profiled objective at the optimum, which equals
    the unprofiled negative log-likelihood evaluated at σ̂².
    """

    params: ModelParams
    R: DiffOrders
    neg_loglik: float
    aic: float
    n_used: int
    kind: SpectrumKind
    spec: SeasonalSpec
    cfg: SpectrumConfig
    orders: ModelOrders
    names: List[str]
    cells: List[CellResult] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def xi_hat(self) -> ModelParams:
        return self.params

    @property
    def R_hat(self) -> DiffOrders:
        return self.R

    @property
    def sigma2_hat(self) -> float:
        return self.params.sigma2

    @property
    def best_cell(self) -> CellResult:
        return next(c for c in self.cells if c.R == self.R)

    @property
    def boundary(self) -> List[str]:
        return self.best_cell.boundary

    @property
    def parameterization(self) -> Parameterization:
        return Parameterization(self.spec, self.orders, self.kind)

    def density(self) -> ModelDensity:
        return spectral_density(self.kind, self.params, self.R, self.spec, self.cfg)

    def estimates(self) -> Dict[str, float]:
        values = self.parameterization.natural(self.params)
        out = dict(zip(self.names, (float(v) for v in values)))
        out["sigma2"] = self.params.sigma2
        return out


def rate_guideline(N: int, r: int, d: float, M: int) -> Optional[str]:
    """
    Check √N · M^{-(2r+2d+1)} <= 1 at the fitted (r, d).

    Returns:
        Warning text, or None when the condition holds
    """
    e = 2 * r + 2 * d + 1
    if e <= 0:
        return None
    value = np.sqrt(N) * M ** (-e)
    if value <= 1.0:
        return None
    needed = int(np.ceil(N ** (1.0 / (2.0 * e))))
    return (
        f"truncation M={M} is small for N={N} at r={r}, d={d:.3f} "
        f"(√N·M^-(2r+2d+1)={value:.3g}); use M >= {needed}"
    )


def _resolve_bounds(bounds: Union[DiffOrders, int, None], c: int) -> DiffOrders:
    if bounds is None:
        return DiffOrders(2, (2,) * c, 2)
    if isinstance(bounds, int):
        return DiffOrders(bounds, (bounds,) * c, bounds)
    if len(bounds.R) != c:
        raise InputError(f"differencing bounds need {c} seasonal entries, got {len(bounds.R)}")
    return bounds


def _map(func: Callable[[int], Any], n: int, threads: int) -> List[Any]:
    if threads <= 1 or n <= 1:
        return [func(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, range(n)))


def fit(
    data: Sequence[float],
    spec: SeasonalSpec,
    cfg: Optional[SpectrumConfig] = None,
    bounds: Union[DiffOrders, int, None] = None,
    kind: Optional[SpectrumKind] = None,
    orders: Optional[ModelOrders] = None,
    starts: Sequence[float] = DEFAULT_STARTS,
    maxfev: int = DEFAULT_MAXFEV,
    threads: int = 1,
) -> FitResult:
    """
    Whittle fit over every differencing cell (r, R_1..R_c) within bounds.

    Every cell uses the last N = len(data) - δ differenced values,
    δ = max_r + Σ z_j max_R_j, so objectives are comparable across cells.

    Args:
        data: Observations including the burn-in
        spec: Seasonal structure
        cfg: Spectrum settings
        bounds: Maximum orders as DiffOrders, or a common bound K (default 2)
        kind: Density family (limiting aggregate by default)
        orders: ARMA orders
        starts: Total memory levels of the starting points
        maxfev: Evaluations per start
        threads: Worker threads for the cells

    Returns:
        FitResult

    Raises:
        InputError: If the series is too short
        NumericError: If Fourier frequencies hit the seasonal poles
        FitError: If every cell failed
    """
    cfg = cfg or SpectrumConfig()
    kind = kind or SpectrumKind.limiting_aggregate()
    orders = orders or ModelOrders()
    bounds = _resolve_bounds(bounds, spec.c)
    y = as_series(data)

    delta = bounds.lag_count(spec)
    n_used = y.size - delta
    if n_used < 16:
        raise InputError(
            f"series too short: {y.size} observations leave {n_used} after a burn-in of {delta}"
        )
    param = Parameterization(spec, orders, kind)
    trial = spectral_density(kind, param.start(0.2), None, spec, cfg)
    check_fourier_grid(periodogram(np.arange(n_used, dtype=float)).freqs, trial.periods,
                       param.free_components, n_used)

    ranges = [range(bounds.r + 1)] + [range(Rj + 1) for Rj in bounds.R]
    cells = [DiffOrders(r, tuple(R), bounds.K) for r, *R in itertools.product(*ranges)]
    logger.info("fitting %d cells on N=%d (burn-in %d)", len(cells), n_used, delta)

    def run(i: int) -> CellResult:
        R = cells[i]
        try:
            return optimize_cell(R, y, spec, cfg, None, kind, orders, n_used, starts, maxfev)
        except (NumericError, InputError) as e:
            logger.warning("cell r=%d R=%s failed: %s", R.r, list(R.R), e)
            return CellResult(R=R, message=str(e))

    results = _map(run, len(cells), threads)
    ok = [c for c in results if c.ok]
    if not ok:
        raise FitError("every differencing cell failed", [c.diagnostics() for c in results])

    best = min(ok, key=lambda c: c.objective)
    assert all(best.objective <= c.objective for c in ok)

    warnings = []
    if best.boundary:
        warnings.append(f"estimate on constraint boundary: {', '.join(best.boundary)}")
    if not best.converged:
        warnings.append(f"selected cell did not converge: {best.message}")
    if kind.family == LIMITING_AGGREGATE:
        note = rate_guideline(n_used, best.R.r, best.params.d, cfg.M)
        if note:
            warnings.append(note)
    for text in warnings:
        logger.warning(text)

    names = param.names
    return FitResult(
        params=best.params,
        R=best.R,
        neg_loglik=best.objective,
        aic=2.0 * best.objective + 2.0 * (len(names) + 1),
        n_used=n_used,
        kind=kind,
        spec=spec,
        cfg=cfg,
        orders=orders,
        names=names,
        cells=results,
        warnings=warnings,
    )


def select_by_aic(
    data: Sequence[float],
    spec: SeasonalSpec,
    candidates: Sequence[ModelOrders],
    **kwargs: Any,
) -> List[FitResult]:
    """
    Fit each candidate ARMA order set and rank the fits by AIC.

    Candidates whose every cell failed are dropped (logged).
    """
    fits = []
    for orders in candidates:
        try:
            fits.append(fit(data, spec, orders=orders, **kwargs))
        except FitError as e:
            logger.warning("orders %s failed: %s", orders.label(), e)
    if not fits:
        raise FitError("no candidate order set could be fitted")
    return sorted(fits, key=lambda f: f.aic)
