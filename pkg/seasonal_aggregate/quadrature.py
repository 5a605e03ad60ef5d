"""
Composite Gauss rules graded toward singular frequencies.

Spectral integrands here behave like |x - p|^{-alpha} (or log|x - p|) near
lattice frequencies p. Panels between singular points are split in half and
each half is covered by geometrically shrinking Gauss-Legendre intervals;
the innermost interval uses a Gauss-Jacobi rule carrying the power-law
weight exactly.
"""

from functools import lru_cache
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy import special

from .errors import NumericError

DEFAULT_NODES = 10
DEFAULT_RATIO = 0.2
DEFAULT_LEVELS = 12


@lru_cache(maxsize=32)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=256)
def _jacobi(n: int, order: float) -> Tuple[np.ndarray, np.ndarray]:
    # weight (1 + t)^(-order) on [-1, 1]
    t, w = special.roots_jacobi(n, 0.0, -order)
    return t, w


def _legendre_on(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    t, w = _legendre(n)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def _split(a: float, b: float, max_width: Optional[float]) -> List[Tuple[float, float]]:
    if max_width is None or b - a <= max_width:
        return [(a, b)]
    pieces = int(np.ceil((b - a) / max_width))
    edges = np.linspace(a, b, pieces + 1)
    return list(zip(edges[:-1], edges[1:]))


def graded_half(
    length: float,
    order: float = 0.0,
    n: int = DEFAULT_NODES,
    ratio: float = DEFAULT_RATIO,
    levels: int = DEFAULT_LEVELS,
    max_width: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Offsets s in (0, length) and weights for an integrand singular at s = 0.

    Args:
        length: Interval length
        order: alpha in |s|^{-alpha}; 0 for bounded or logarithmic behaviour
        n: Nodes per interval
        ratio: Geometric shrink factor between consecutive intervals
        levels: Number of graded Gauss-Legendre intervals
        max_width: Subdivide any interval wider than this

    Returns:
        (offsets, weights)

    Raises:
        NumericError: If order >= 1 (not integrable)
    """
    if order >= 1.0:
        raise NumericError(f"singularity of order {order:.6g} is not integrable")

    xs, ws = [], []
    edges = length * ratio ** np.arange(levels + 1)
    for k in range(levels):
        for a, b in _split(edges[k + 1], edges[k], max_width):
            x, w = _legendre_on(a, b, n)
            xs.append(x)
            ws.append(w)

    eps = edges[-1]
    if order != 0.0:
        t, w = _jacobi(n, round(float(order), 12))
        xs.append(0.5 * eps * (t + 1.0))
        ws.append(0.5 * eps * w * (1.0 + t) ** order)
    else:
        x, w = _legendre_on(0.0, eps, n)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def composite_rule(
    singular_points: Iterable[Tuple[float, float]],
    lo: float = 0.0,
    hi: float = np.pi,
    n: int = DEFAULT_NODES,
    ratio: float = DEFAULT_RATIO,
    levels: int = DEFAULT_LEVELS,
    max_width: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights on [lo, hi] graded toward every breakpoint.

    Args:
        singular_points: (frequency, order) pairs; points outside [lo, hi] are ignored
        lo: Lower limit
        hi: Upper limit

    Returns:
        (nodes, weights), nodes sorted ascending
    """
    orders = {lo: 0.0, hi: 0.0}
    for p, order in singular_points:
        if lo <= p <= hi:
            orders[p] = orders.get(p, 0.0) + order
    edges = sorted(orders)

    xs, ws = [], []
    for u, v in zip(edges[:-1], edges[1:]):
        half = 0.5 * (v - u)
        s, w = graded_half(half, orders[u], n, ratio, levels, max_width)
        xs.append(u + s)
        ws.append(w)
        s, w = graded_half(half, orders[v], n, ratio, levels, max_width)
        xs.append(v - s)
        ws.append(w)

    x = np.concatenate(xs)
    w = np.concatenate(ws)
    idx = np.argsort(x, kind="stable")
    return x[idx], w[idx]


def window_rule(
    center: float,
    left: float,
    right: float,
    order: float,
    n: int = DEFAULT_NODES,
    ratio: float = DEFAULT_RATIO,
    levels: int = DEFAULT_LEVELS,
    max_width: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Rule on [center - left, center + right] graded toward ``center``."""
    xs, ws = [], []
    if left > 0:
        s, w = graded_half(left, order, n, ratio, levels, max_width)
        xs.append(center - s)
        ws.append(w)
    if right > 0:
        s, w = graded_half(right, order, n, ratio, levels, max_width)
        xs.append(center + s)
        ws.append(w)
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)
