"""
Domain types, parameter constraints and fractional-differencing utilities.

All types are frozen dataclasses; operations here are pure.
"""

import json
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError

ROOT_TOLERANCE = 1e-8
COMMON_ROOT_TOLERANCE = 1e-6


def _float_tuple(values: Iterable[Any]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _int_tuple(values: Iterable[Any]) -> Tuple[int, ...]:
    out = []
    for v in values:
        if float(v) != int(v):
            raise InputError(f"expected an integer, got {v!r}")
        out.append(int(v))
    return tuple(out)


@dataclass(frozen=True)
class SeasonalSpec:
    """
    Seasonal structure of a series.

    Attributes:
        z: Aggregate-scale periods z_1 < ... < z_c (may be empty)
        m: Aggregation size, or None for the limiting model
    """

    z: Tuple[int, ...] = ()
    m: Optional[int] = None

    def __post_init__(self):
        z = _int_tuple(self.z)
        object.__setattr__(self, "z", z)
        if any(v < 1 for v in z):
            raise InputError(f"seasonal periods must be >= 1, got {list(z)}")
        if any(b <= a for a, b in zip(z, z[1:])):
            raise InputError(f"seasonal periods must be strictly increasing, got {list(z)}")
        if self.m is not None:
            m = int(self.m)
            if m < 2:
                raise InputError(f"aggregation size m must be >= 2, got {m}")
            object.__setattr__(self, "m", m)

    @property
    def c(self) -> int:
        """Number of seasonal components."""
        return len(self.z)

    @property
    def s(self) -> Optional[Tuple[int, ...]]:
        """Fine-scale periods s_i = m * z_i, or None without m."""
        if self.m is None:
            return None
        return tuple(self.m * zi for zi in self.z)

    @property
    def periods(self) -> Tuple[int, ...]:
        """Periods on the scale the SARFIMA density is evaluated on."""
        return self.s if self.m is not None else self.z

    def limiting(self) -> "SeasonalSpec":
        """The same seasonal structure without an aggregation size."""
        return replace(self, m=None)


@dataclass(frozen=True)
class ModelParams:
    """
    Fractional orders, ARMA coefficients and innovation variance.

    AR polynomials follow 1 - a_1 B - ... - a_p B^p and MA polynomials
    1 + b_1 B + ... + b_q B^q. ``ar[j]``/``ma[j]`` belong to seasonal
    component j (0-based); missing trailing components mean no ARMA terms.
    ``regular_ar``/``regular_ma`` are only used by fine-scale SARFIMA and
    finite-m aggregate densities.
    """

    d: float = 0.0
    D: Tuple[float, ...] = ()
    ar: Tuple[Tuple[float, ...], ...] = ()
    ma: Tuple[Tuple[float, ...], ...] = ()
    regular_ar: Tuple[float, ...] = ()
    regular_ma: Tuple[float, ...] = ()
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "D", _float_tuple(self.D))
        object.__setattr__(self, "ar", tuple(_float_tuple(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(_float_tuple(b) for b in self.ma))
        object.__setattr__(self, "regular_ar", _float_tuple(self.regular_ar))
        object.__setattr__(self, "regular_ma", _float_tuple(self.regular_ma))
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def total_memory(self) -> float:
        """d + sum of the seasonal fractional orders."""
        return self.d + sum(self.D)

    def seasonal_ar(self, j: int) -> Tuple[float, ...]:
        return self.ar[j] if j < len(self.ar) else ()

    def seasonal_ma(self, j: int) -> Tuple[float, ...]:
        return self.ma[j] if j < len(self.ma) else ()

    def with_sigma2(self, sigma2: float) -> "ModelParams":
        return replace(self, sigma2=sigma2)


@dataclass(frozen=True)
class DiffOrders:
    """
    Integer differencing orders (r, R_1..R_c), each bounded by K.
    """

    r: int = 0
    R: Tuple[int, ...] = ()
    K: int = 2

    def __post_init__(self):
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "R", _int_tuple(self.R))
        object.__setattr__(self, "K", int(self.K))
        if self.K < 0:
            raise InputError(f"order bound K must be >= 0, got {self.K}")
        if not 0 <= self.r <= self.K:
            raise InputError(f"r must lie in 0..{self.K}, got {self.r}")
        bad = [v for v in self.R if not 0 <= v <= self.K]
        if bad:
            raise InputError(f"R entries must lie in 0..{self.K}, got {list(self.R)}")

    @classmethod
    def zero(cls, c: int, K: int = 2) -> "DiffOrders":
        return cls(0, (0,) * c, K)

    def seasonal(self, j: int) -> int:
        return self.R[j] if j < len(self.R) else 0

    def lag_count(self, spec: SeasonalSpec) -> int:
        """Observations consumed by these differencing operators."""
        return self.r + sum(zi * self.seasonal(j) for j, zi in enumerate(spec.z))

    @property
    def is_zero(self) -> bool:
        return self.r == 0 and not any(self.R)


def burn_in_length(spec: SeasonalSpec, K: int) -> int:
    """Pre-sample length delta = max_r + sum z_i * max_R_i with all bounds K."""
    return K + sum(zi * K for zi in spec.z)


@dataclass(frozen=True)
class SpectrumConfig:
    """
    Numerical settings for spectrum evaluation.

    Attributes:
        M: Truncation of the infinite power sum (k = -M..M)
        tail_correction: Add the integral tail estimate beyond |k| = M
        grid_size: Number of frequencies of dense evaluation grids
    """

    M: int = 50
    tail_correction: bool = True
    grid_size: int = 2 ** 20

    def __post_init__(self):
        if int(self.M) < 1:
            raise InputError(f"truncation M must be >= 1, got {self.M}")
        if int(self.grid_size) < 8:
            raise InputError(f"grid_size must be >= 8, got {self.grid_size}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "grid_size", int(self.grid_size))
        object.__setattr__(self, "tail_correction", bool(self.tail_correction))


@dataclass(frozen=True)
class ModelOrders:
    """
    ARMA orders: seasonal (P_j, Q_j) per component and regular (p, q).
    """

    P: Tuple[int, ...] = ()
    Q: Tuple[int, ...] = ()
    p: int = 0
    q: int = 0

    def __post_init__(self):
        object.__setattr__(self, "P", _int_tuple(self.P))
        object.__setattr__(self, "Q", _int_tuple(self.Q))
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))
        if any(v < 0 for v in (*self.P, *self.Q, self.p, self.q)):
            raise InputError("ARMA orders must be non-negative")

    def seasonal_p(self, j: int) -> int:
        return self.P[j] if j < len(self.P) else 0

    def seasonal_q(self, j: int) -> int:
        return self.Q[j] if j < len(self.Q) else 0

    def label(self) -> str:
        parts = [f"({self.seasonal_p(j)},{self.seasonal_q(j)})" for j in range(max(len(self.P), len(self.Q)))]
        return f"p={self.p} q={self.q} seasonal={''.join(parts) or '-'}"


@dataclass
class ValidationReport:
    """Violated invariants (errors) and advisory findings (warnings)."""

    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def polynomial_roots(coeffs: Sequence[float], kind: str) -> np.ndarray:
    """
    Roots of an AR (1 - a_1 z - ...) or MA (1 + b_1 z + ...) polynomial.

    np.roots diagonalizes the companion matrix of the polynomial.
    """
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0.0:
        coeffs.pop()
    if not coeffs:
        return np.empty(0, dtype=complex)
    sign = -1.0 if kind == "ar" else 1.0
    ascending = [1.0] + [sign * c for c in coeffs]
    return np.roots(ascending[::-1])


def _roots_in_backshift(roots: np.ndarray, period: int) -> np.ndarray:
    """Roots in B of a polynomial evaluated at B**period."""
    if period == 1 or roots.size == 0:
        return roots
    out = []
    for rho in roots:
        base = rho ** (1.0 / period)
        out.extend(base * np.exp(2j * np.pi * np.arange(period) / period))
    return np.asarray(out)


def validate(params: ModelParams, spec: SeasonalSpec, tol: float = ROOT_TOLERANCE) -> ValidationReport:
    """
    Check parameters against the stationarity and identifiability constraints.

    Args:
        params: Model parameters
        spec: Seasonal structure
        tol: Tolerance on |root| - 1 for the unit-circle checks

    Returns:
        ValidationReport; empty errors means valid
    """
    report = ValidationReport()
    c = spec.c

    if len(params.D) != c:
        report.errors.append(f"expected {c} seasonal fractional orders, got {len(params.D)}")
    if len(params.ar) > c or len(params.ma) > c:
        report.errors.append(f"seasonal ARMA given for more than {c} components")
    if not params.sigma2 > 0:
        report.errors.append("sigma2 must be positive")
    if not -0.5 < params.d < 0.5:
        report.errors.append(f"d={params.d} outside (-1/2, 1/2)")
    for j, Dj in enumerate(params.D, start=1):
        if not 0.0 <= Dj < 0.5:
            report.errors.append(f"D.{j}={Dj} outside [0, 1/2)")
    total = params.total_memory
    if total >= 0.5:
        report.errors.append(f"d+ΣD ≥ 1/2 (d+ΣD={total:.6g})")
    elif total < 0.0:
        report.errors.append(f"d+ΣD < 0 (d+ΣD={total:.6g})")
    if c and spec.z[0] == 1 and params.D and params.D[0] != 0.0:
        report.errors.append("D.1 must be 0 when z_1 = 1 (confounded with d)")

    periods = spec.periods
    polys = [("regular", 1, params.regular_ar, params.regular_ma)]
    for j in range(c):
        polys.append((f"component {j + 1}", periods[j], params.seasonal_ar(j), params.seasonal_ma(j)))

    backshift_roots = []
    for name, period, ar, ma in polys:
        ar_roots = polynomial_roots(ar, "ar")
        ma_roots = polynomial_roots(ma, "ma")
        if np.any(np.abs(ar_roots) - 1.0 <= tol):
            report.errors.append(f"AR root on/inside unit circle ({name})")
        if np.any(np.abs(ma_roots) - 1.0 <= tol):
            report.errors.append(f"MA root on/inside unit circle ({name})")
        if _have_common_root(ar_roots, ma_roots):
            report.errors.append(f"common AR/MA root ({name})")
        backshift_roots.append(
            (name, _roots_in_backshift(ar_roots, period), _roots_in_backshift(ma_roots, period))
        )

    for a_name, a_ar, _ in backshift_roots:
        for b_name, _, b_ma in backshift_roots:
            if a_name != b_name and _have_common_root(a_ar, b_ma):
                report.warnings.append(f"AR root of {a_name} matches MA root of {b_name}")

    return report


def _have_common_root(a: np.ndarray, b: np.ndarray) -> bool:
    if a.size == 0 or b.size == 0:
        return False
    gap = np.abs(a[:, None] - b[None, :])
    scale = np.maximum(1.0, np.abs(a)[:, None])
    return bool(np.any(gap <= COMMON_ROOT_TOLERANCE * scale))


def fracdiff_coeffs(d: float, n: int) -> np.ndarray:
    """
    Coefficients c_0..c_n of (1 - B)^d.

    c_k = Gamma(k - d) / (Gamma(k + 1) Gamma(-d)), via c_k = c_{k-1} (k - 1 - d) / k.
    """
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    k = np.arange(1, n + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((k - 1.0 - d) / k)))


# ---------------------------------------------------------------------------
# Flat key-value serialization
# ---------------------------------------------------------------------------

def format_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return json.dumps([format_json(v) for v in value])
    return str(value)


def format_json(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [format_json(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def parse_value(text: str) -> Any:
    """Parse a config value: JSON lists/numbers/booleans, else the raw string."""
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _indexed(mapping: Mapping[str, Any], prefix: str) -> Dict[int, Any]:
    out = {}
    for key, value in mapping.items():
        if key.startswith(prefix + "."):
            suffix = key[len(prefix) + 1:]
            if not suffix.isdigit() or int(suffix) < 1:
                raise InputError(f"bad component index in key {key!r}")
            out[int(suffix)] = value
    return out


def _as_list(value: Any, key: str) -> List[float]:
    if isinstance(value, str):
        value = parse_value(value)
    if isinstance(value, (int, float)):
        return [float(value)]
    if not isinstance(value, (list, tuple)):
        raise InputError(f"{key}: expected a list, got {value!r}")
    return [float(v) for v in value]


def params_to_kv(params: ModelParams) -> List[Tuple[str, str]]:
    """Render parameters as ordered key/value pairs (``d=0.2``, ``D.1=0.25``, ``ar.1=[0.9]``)."""
    items = [("d", format_scalar(params.d))]
    items += [(f"D.{j}", format_scalar(v)) for j, v in enumerate(params.D, start=1)]
    items += [(f"ar.{j}", format_scalar(list(v))) for j, v in enumerate(params.ar, start=1) if v]
    items += [(f"ma.{j}", format_scalar(list(v))) for j, v in enumerate(params.ma, start=1) if v]
    if params.regular_ar:
        items.append(("phi", format_scalar(list(params.regular_ar))))
    if params.regular_ma:
        items.append(("theta", format_scalar(list(params.regular_ma))))
    items.append(("sigma2", format_scalar(params.sigma2)))
    return items


def params_from_kv(mapping: Mapping[str, Any], c: Optional[int] = None) -> ModelParams:
    """
    Build ModelParams from a flat mapping.

    Args:
        mapping: Keys such as ``d``, ``D.1``, ``ar.1``, ``ma.1``, ``phi``, ``theta``, ``sigma2``
        c: Number of seasonal components; missing ``D.j`` default to 0

    Returns:
        ModelParams
    """
    try:
        d = float(parse_value(str(mapping.get("d", 0.0))))
        D_map = {k: float(parse_value(str(v))) for k, v in _indexed(mapping, "D").items()}
        ar_map = {k: _as_list(v, f"ar.{k}") for k, v in _indexed(mapping, "ar").items()}
        ma_map = {k: _as_list(v, f"ma.{k}") for k, v in _indexed(mapping, "ma").items()}
        sigma2 = float(parse_value(str(mapping.get("sigma2", 1.0))))
    except (TypeError, ValueError) as e:
        raise InputError(f"invalid parameter value: {e}") from e

    n = c if c is not None else max([0, *D_map, *ar_map, *ma_map])
    if any(k > n for k in (*D_map, *ar_map, *ma_map)):
        raise InputError(f"parameter index exceeds the {n} seasonal components")
    n_arma = max([0, *ar_map, *ma_map])
    return ModelParams(
        d=d,
        D=tuple(D_map.get(j, 0.0) for j in range(1, n + 1)),
        ar=tuple(tuple(ar_map.get(j, ())) for j in range(1, n_arma + 1)),
        ma=tuple(tuple(ma_map.get(j, ())) for j in range(1, n_arma + 1)),
        regular_ar=tuple(_as_list(mapping["phi"], "phi")) if "phi" in mapping else (),
        regular_ma=tuple(_as_list(mapping["theta"], "theta")) if "theta" in mapping else (),
        sigma2=sigma2,
    )


def spec_from_kv(mapping: Mapping[str, Any]) -> SeasonalSpec:
    z = mapping.get("z", [])
    z = parse_value(z) if isinstance(z, str) else z
    if isinstance(z, (int, float)):
        z = [z]
    m = mapping.get("m")
    if isinstance(m, str):
        m = parse_value(m)
    if m in ("", None, "none"):
        m = None
    return SeasonalSpec(z=tuple(z), m=m)


def orders_from_kv(mapping: Mapping[str, Any], c: int, K: int = 2) -> DiffOrders:
    R = _indexed(mapping, "R")
    return DiffOrders(
        r=int(parse_value(str(mapping.get("r", 0)))),
        R=tuple(int(parse_value(str(R.get(j, 0)))) for j in range(1, c + 1)),
        K=K,
    )


def model_orders_from_kv(mapping: Mapping[str, Any], c: int) -> ModelOrders:
    P = _indexed(mapping, "ar_order")
    Q = _indexed(mapping, "ma_order")
    return ModelOrders(
        P=tuple(int(parse_value(str(P.get(j, 0)))) for j in range(1, c + 1)),
        Q=tuple(int(parse_value(str(Q.get(j, 0)))) for j in range(1, c + 1)),
        p=int(parse_value(str(mapping.get("p", 0)))),
        q=int(parse_value(str(mapping.get("q", 0)))),
    )
