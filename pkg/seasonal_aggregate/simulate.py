"""
Stationary Gaussian simulation from model spectra and the Monte Carlo
harness for aggregate-data experiments.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .asymptotics import replicate_rng
from .cache import get_cache
from .errors import InputError, NumericError, SeasonalAggregateError, SimulationError
from .model import (
    DiffOrders,
    ModelOrders,
    ModelParams,
    SeasonalSpec,
    SpectrumConfig,
    burn_in_length,
    validate,
)
from .quadrature import window_rule
from .spectra import ModelDensity, SpectrumKind, spectral_density
from .whittle import fit

logger = logging.getLogger(__name__)

MAX_GRID = 2 ** 24
_COS_BLOCK = 2 ** 22
SILENT_CLAMP = 1e-8
WARN_CLAMP = 1e-3
MAX_EMBEDDING_FACTOR = 16

Spectrum = Union[ModelDensity, Callable[[np.ndarray], np.ndarray]]


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


# ---------------------------------------------------------------------------
# Autocovariances
# ---------------------------------------------------------------------------

def _evaluate(f: Spectrum, x: np.ndarray) -> np.ndarray:
    if isinstance(f, ModelDensity):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(f(x, check=False), dtype=float)
    return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape).astype(float)


def _cos_weighted(nodes: np.ndarray, values: np.ndarray, n_lags: int) -> np.ndarray:
    """Σ_i values_i cos(k nodes_i) for k = 0..n_lags."""
    out = np.zeros(n_lags + 1)
    k = np.arange(n_lags + 1, dtype=float)
    step = max(1, _COS_BLOCK // max(nodes.size, 1))
    for start in range(0, n_lags + 1, step):
        kk = k[start:start + step]
        out[start:start + step] = np.cos(np.outer(kk, nodes)) @ values
    return out


def _windows(points: Sequence[Tuple[float, float]], delta: float) -> List[Tuple[float, float, float, int, int]]:
    """(center, order, width, first cell, end cell) of each pole window, snapped to grid cells."""
    poles = sorted(p for p in points if p[1] != 0.0)
    lattice = sorted({p for p, _ in points} | {0.0, np.pi})
    out = []
    for center, order in poles:
        gaps = [abs(center - q) for q in lattice if q != center]
        gap = min(gaps) if gaps else np.pi
        width = min(0.25 * gap, max(64.0 * delta, 1e-3))
        lo_cell = max(0, int(np.floor((center - width) / delta)))
        hi_cell = min(int(round(np.pi / delta)), int(np.ceil((center + width) / delta)))
        out.append((center, order, width, lo_cell, hi_cell))
    return out


def acvf_from_spectrum(
    f: Spectrum,
    n_lags: int,
    cfg: Optional[SpectrumConfig] = None,
    singular_points: Optional[Sequence[Tuple[float, float]]] = None,
) -> np.ndarray:
    """
    γ(k) = ∫_{-π}^{π} f(ω) cos(kω) dω for k = 0..n_lags.

    Midpoint rule on a dense grid of (0, π) evaluated with one real FFT,
    with the cells around every pole replaced by graded Gauss-Jacobi
    windows that integrate the power-law singularity exactly.

    Args:
        f: ModelDensity or any vectorized even spectrum on (0, π)
        n_lags: Largest lag
        cfg: Grid size (cfg.grid_size points at least)
        singular_points: (frequency, order) pairs for plain callables

    Returns:
        Autocovariances γ(0..n_lags)

    Raises:
        InputError: If a pole order makes f non-integrable
        NumericError: If the required grid exceeds 2^24 points
    """
    cfg = cfg or SpectrumConfig()
    if n_lags < 0:
        raise InputError(f"n_lags must be >= 0, got {n_lags}")
    L = max(cfg.grid_size, next_pow2(8 * (n_lags + 1)))
    if L > MAX_GRID:
        raise NumericError(f"{n_lags} lags need a grid of {L} points (limit {MAX_GRID})")

    points = list(f.singular_points) if isinstance(f, ModelDensity) else list(singular_points or [])
    bad = [(p, o) for p, o in points if o >= 1.0]
    if bad:
        raise InputError(f"spectrum is not integrable: pole orders {bad} reach 1")

    def compute() -> np.ndarray:
        return _acvf(f, n_lags, L, points)

    if isinstance(f, ModelDensity):
        gamma = get_cache().get_or_fetch(("acvf", f, n_lags, L), compute)
        return gamma.copy()
    return compute()


def _acvf(f: Spectrum, n_lags: int, L: int, points: Sequence[Tuple[float, float]]) -> np.ndarray:
    delta = np.pi / L
    x = (np.arange(L) + 0.5) * delta
    values = _evaluate(f, x)

    windows = _windows(points, delta)
    for _, _, _, lo_cell, hi_cell in windows:
        values[lo_cell:hi_cell] = 0.0
    if not np.all(np.isfinite(values)):
        raise NumericError("spectrum is not finite away from its poles")

    spectrum = np.fft.rfft(values, 2 * L)[: n_lags + 1]
    k = np.arange(n_lags + 1)
    gamma = 2.0 * delta * np.real(np.exp(-0.5j * k * delta) * spectrum)

    max_width = 2.0 / n_lags if n_lags > 0 else None
    for center, order, _, lo_cell, hi_cell in windows:
        left = center - lo_cell * delta
        right = hi_cell * delta - center
        nodes, weights = window_rule(center, left, right, order, max_width=max_width)
        fx = _evaluate(f, nodes)
        gamma += 2.0 * _cos_weighted(nodes, weights * fx, n_lags)
    return gamma


# ---------------------------------------------------------------------------
# Circulant embedding
# ---------------------------------------------------------------------------

def _eigenvalues(gamma: np.ndarray, half: int) -> np.ndarray:
    row = np.concatenate([gamma[: half + 1], gamma[half - 1:0:-1]])
    return np.fft.fft(row).real


def gaussian_sample(
    gamma: Sequence[float],
    N: int,
    seed: Union[int, np.random.Generator, None] = 0,
) -> np.ndarray:
    """
    Exact stationary Gaussian sample with autocovariances γ.

    The covariance is embedded in a circulant of size 2M, M = 2^⌈log2(N-1)⌉,
    doubled while negative eigenvalues remain (up to 16N and the length of
    γ). Remaining eigenvalues >= -1e-8·max are clamped silently, those
    >= -1e-3·max with a warning.

    Raises:
        InputError: If fewer than N autocovariances are given
        SimulationError: If eigenvalues below -1e-3·max persist
    """
    gamma = np.asarray(gamma, dtype=float)
    if N < 1:
        raise InputError(f"sample size must be >= 1, got {N}")
    if gamma.size < N:
        raise InputError(f"need at least {N} autocovariances, got {gamma.size}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if N == 1:
        return rng.standard_normal(1) * np.sqrt(gamma[0])

    half = min(next_pow2(N - 1), gamma.size - 1)
    limit = min(MAX_EMBEDDING_FACTOR * N // 2, gamma.size - 1)
    lam = _eigenvalues(gamma, half)
    while lam.min() < -SILENT_CLAMP * lam.max() and 2 * half <= limit:
        half *= 2
        lam = _eigenvalues(gamma, half)

    top = lam.max()
    worst = lam.min()
    if worst < -WARN_CLAMP * top:
        raise SimulationError(
            f"circulant embedding of size {2 * half} has eigenvalue {worst:.3g} (max {top:.3g})"
        )
    if worst < -SILENT_CLAMP * top:
        logger.warning("clamping negative circulant eigenvalues down to %.3g (max %.3g)", worst, top)
    elif worst < 0:
        logger.debug("clamping negligible circulant eigenvalues (min %.3g)", worst)
    lam = np.clip(lam, 0.0, None)

    n_c = lam.size
    z = rng.standard_normal(n_c) + 1j * rng.standard_normal(n_c)
    return np.fft.fft(np.sqrt(lam / n_c) * z).real[:N]


def simulate_from_density(
    density: ModelDensity,
    N: int,
    seed: Union[int, np.random.Generator, None] = 0,
) -> np.ndarray:
    """Gaussian sample of length N from a model density."""
    # room for one doubling of the circulant embedding
    gamma = acvf_from_spectrum(density, 2 * next_pow2(max(N - 1, 1)), density.cfg)
    return gaussian_sample(gamma, N, seed)


# ---------------------------------------------------------------------------
# Aggregate-data experiments
# ---------------------------------------------------------------------------

FITTERS = ("limiting", "sarfima")


@dataclass(frozen=True)
class McConfig:
    """
    Monte Carlo settings: a finite-m aggregate of a fine-scale
    ARFIMA-with-seasonal-memory process with regular AR(1) part.

    Attributes:
        d: Regular fractional order
        D: Seasonal fractional orders (one per period in z)
        phi1: Fine-scale AR(1) coefficient
        sigma: Innovation standard deviation
        z: Aggregate-scale periods
        m: Aggregation size
        N: Fitted sample size (the burn-in is simulated on top)
        replicates: Number of replicates
        seed: Root seed
        fitters: Subset of ("limiting", "sarfima")
        max_order: Differencing bound K of the fits
        M: Truncation of the limiting density
        grid_size: Autocovariance grid size
        threads: Worker threads
    """

    d: float = -0.1
    D: Tuple[float, ...] = (0.3,)
    phi1: float = 0.0
    sigma: float = 2.0
    z: Tuple[int, ...] = (10,)
    m: int = 60
    N: int = 512
    replicates: int = 200
    seed: int = 0
    fitters: Tuple[str, ...] = ("limiting",)
    max_order: int = 2
    M: int = 50
    grid_size: int = 2 ** 20
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "D", tuple(float(v) for v in self.D))
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        object.__setattr__(self, "fitters", tuple(self.fitters))
        if self.replicates < 1:
            raise InputError(f"replicates must be >= 1, got {self.replicates}")
        if len(self.D) != len(self.z):
            raise InputError(f"need one D per period: D={list(self.D)}, z={list(self.z)}")
        if self.sigma <= 0:
            raise InputError(f"sigma must be positive, got {self.sigma}")
        unknown = [f for f in self.fitters if f not in FITTERS]
        if unknown:
            raise InputError(f"unknown fitters {unknown}; choose from {list(FITTERS)}")
        report = validate(self.true_params(), self.spec)
        if not report.ok:
            raise InputError("; ".join(report.errors))

    @property
    def spec(self) -> SeasonalSpec:
        return SeasonalSpec(z=self.z, m=self.m)

    def true_params(self) -> ModelParams:
        return ModelParams(
            d=self.d,
            D=self.D,
            regular_ar=(self.phi1,) if self.phi1 else (),
            sigma2=self.sigma ** 2,
        )

    @property
    def burn_in(self) -> int:
        return burn_in_length(self.spec, self.max_order)

    def spectrum_config(self) -> SpectrumConfig:
        return SpectrumConfig(M=self.M, grid_size=self.grid_size)


def simulation_params(cfg: McConfig) -> ModelParams:
    """
    Parameters of the finite-m aggregate density that reproduce the
    simulation spectrum

        σ² |sin(ω/2)|² Π|sin(z_jω/2)|^{-2D_j}
           Σ_k |2m sin((ω+2kπ)/(2m))|^{-2d-2} |φ(e^{i(ω+2kπ)/m})|^{-2}

    (the aggregate density carries σ²/(2π), factors 2 inside the sines and
    a 1/m prefactor, absorbed here into σ²).
    """
    truth = cfg.true_params()
    scale = 2.0 * np.pi * cfg.m ** (-(2.0 * cfg.d + 1.0)) * 2.0 ** (2.0 * sum(cfg.D) - 2.0)
    return truth.with_sigma2(truth.sigma2 * scale)


def simulation_density(cfg: McConfig) -> ModelDensity:
    return spectral_density(
        SpectrumKind.aggregate_finite(cfg.m),
        simulation_params(cfg),
        DiffOrders.zero(len(cfg.z), cfg.max_order),
        SeasonalSpec(z=cfg.z),
        cfg.spectrum_config(),
    )


def simulate_aggregate(cfg: McConfig, replicate: int = 0) -> np.ndarray:
    """
    One aggregate series of length N + δ from the simulation spectrum.

    The replicate generator is derived from (seed, replicate), so a series
    does not depend on which worker draws it.
    """
    n = cfg.N + cfg.burn_in
    return simulate_from_density(simulation_density(cfg), n, replicate_rng(cfg.seed, replicate))


@dataclass
class FitterSummary:
    """Means and SDs of one fitter's estimates."""

    fitter: str
    names: List[str]
    estimates: np.ndarray
    zero_orders: int
    failures: int

    @property
    def successes(self) -> int:
        return self.estimates.shape[0]

    def mean(self) -> Dict[str, float]:
        return dict(zip(self.names, np.mean(self.estimates, axis=0).tolist()))

    def sd(self) -> Dict[str, float]:
        if self.successes < 2:
            return {n: float("nan") for n in self.names}
        return dict(zip(self.names, np.std(self.estimates, axis=0, ddof=1).tolist()))

    @property
    def zero_order_fraction(self) -> float:
        return self.zero_orders / self.successes if self.successes else 0.0


@dataclass
class MonteCarloTable:
    """Per-fitter summaries of a Monte Carlo run."""

    cfg: McConfig
    summaries: Dict[str, FitterSummary] = field(default_factory=dict)

    def rows(self) -> List[Dict[str, object]]:
        """One row per fitter: phi1, fitter, mean/sd per parameter, counts."""
        rows = []
        for name, s in self.summaries.items():
            row: Dict[str, object] = {"phi1": self.cfg.phi1, "fitter": name}
            mean, sd = s.mean(), s.sd()
            for p in s.names:
                row[f"mean.{p}"] = mean.get(p, float("nan"))
                row[f"sd.{p}"] = sd.get(p, float("nan"))
            row["successes"] = s.successes
            row["zero_orders"] = s.zero_order_fraction
            rows.append(row)
        return rows


def _estimate_names(c: int) -> List[str]:
    names = ["d"] + [f"D.{j + 1}" for j in range(c)]
    return names + ["d+ΣD"] if c else names


def monte_carlo_table(cfg: McConfig) -> MonteCarloTable:
    """
    simulate → fit (limiting model, optionally SARFIMA) per replicate, then
    tabulate means and SDs of d̂, D̂ and d̂ + ΣD̂.

    Replicate failures are logged and counted; aggregation is over the
    replicates collected by index.
    """
    spec = SeasonalSpec(z=cfg.z)
    scfg = cfg.spectrum_config()
    bounds = DiffOrders(cfg.max_order, (cfg.max_order,) * spec.c, cfg.max_order)
    fitter_kinds = {
        "limiting": (SpectrumKind.limiting_aggregate(), ModelOrders()),
        "sarfima": (SpectrumKind.fine_sarfima(), ModelOrders(p=1 if cfg.phi1 else 0)),
    }
    names = _estimate_names(spec.c)

    def replicate(b: int) -> Dict[str, Optional[Tuple[np.ndarray, bool]]]:
        y = simulate_aggregate(cfg, b)
        out = {}
        for fitter in cfg.fitters:
            kind, orders = fitter_kinds[fitter]
            try:
                res = fit(y, spec, scfg, bounds, kind=kind, orders=orders)
            except SeasonalAggregateError as e:
                logger.warning("replicate %d (%s) failed: %s", b, fitter, e)
                out[fitter] = None
                continue
            p = res.params
            values = [p.d, *p.D] + ([p.total_memory] if spec.c else [])
            out[fitter] = (np.asarray(values), res.R.is_zero)
        return out

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(replicate, range(cfg.replicates)))
    else:
        results = [replicate(b) for b in range(cfg.replicates)]

    table = MonteCarloTable(cfg)
    for fitter in cfg.fitters:
        collected = [r[fitter] for r in results if r[fitter] is not None]
        estimates = np.vstack([v for v, _ in collected]) if collected else np.empty((0, len(names)))
        table.summaries[fitter] = FitterSummary(
            fitter=fitter,
            names=names,
            estimates=estimates,
            zero_orders=sum(1 for _, zero in collected if zero),
            failures=cfg.replicates - len(collected),
        )
        logger.info("%s: %d/%d replicates fitted", fitter, len(collected), cfg.replicates)
    return table
