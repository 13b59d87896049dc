"""Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals."""
from __future__ import annotations

import heapq
import math
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError, IntegrationError
from .tolerance import DEFAULT_TOLERANCE, Tolerance

MAX_DEPTH = 60
MAX_INTERVALS = 20000

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss weights belonging to the odd-indexed Kronrod nodes (and the centre)
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 abscissae on [-1, 1] and the matching weight vectors
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KRONROD = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5]] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps


def _rule(f, lo, hi, vectorized):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre + half * _NODES
    if vectorized:
        fx = np.asarray(f(x), dtype=float)
    else:
        fx = np.array([f(float(xi)) for xi in x], dtype=float)
    if not np.all(np.isfinite(fx)):
        raise IntegrationError(
            f"integrand not finite on [{lo!r}, {hi!r}]", estimate=math.nan, error=math.inf
        )
    kron = half * float(_KRONROD @ fx)
    gauss = half * float(_GAUSS @ fx)
    abs_area = abs(half) * float(_KRONROD @ np.abs(fx))
    mean = kron / (2.0 * half) if half else 0.0
    asc = abs(half) * float(_KRONROD @ np.abs(fx - mean))
    err = abs(kron - gauss)
    # QUADPACK error scaling
    if asc != 0.0 and err != 0.0:
        err = asc * min(1.0, (200.0 * err / asc) ** 1.5)
    if abs_area > np.finfo(float).tiny / (50.0 * _EPS):
        err = max(50.0 * _EPS * abs_area, err)
    return kron, err, abs_area


def integrate(
    f: Callable,
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
    *,
    points: Sequence[float] = (),
    vectorized: bool = False,
) -> float:
    """Integrate ``f`` over ``[lo, hi]`` by adaptive bisection.

    The interval with the largest error estimate is halved until the
    summed estimate drops below ``max(tol.abs_tol, tol.rel_tol * |I|)``.
    ``points`` are interior breakpoints where ``f`` is known to be
    non-smooth; they seed the initial partition.

    Raises
    ------
    IntegrationError
        When an interval would need more than 60 bisections, or the
        partition grows past ``MAX_INTERVALS``.  The exception carries the
        best estimate and its error.
    """
    if not lo < hi:
        raise DomainError(f"integrate requires lo < hi, got [{lo!r}, {hi!r}]")
    cuts = sorted({lo, hi, *(p for p in points if lo < p < hi)})
    heap = []
    total = 0.0
    total_err = 0.0
    total_abs = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, err, area = _rule(f, a, b, vectorized)
        heapq.heappush(heap, (-err, a, b, val, 0, area))
        total += val
        total_err += err
        total_abs += area
    while True:
        # below ~100 eps of the integral of |f| the estimate is pure roundoff
        target = max(tol.abs_tol, tol.rel_tol * abs(total), 100.0 * _EPS * total_abs)
        if total_err <= target:
            return math.fsum(item[3] for item in heap)
        neg_err, a, b, val, depth, area = heapq.heappop(heap)
        if depth >= MAX_DEPTH or len(heap) >= MAX_INTERVALS:
            raise IntegrationError(
                "adaptive quadrature did not converge", estimate=total, error=total_err
            )
        mid = 0.5 * (a + b)
        left = _rule(f, a, mid, vectorized)
        right = _rule(f, mid, b, vectorized)
        total += left[0] + right[0] - val
        total_err += left[1] + right[1] + neg_err
        total_abs += left[2] + right[2] - area
        heapq.heappush(heap, (-left[1], a, mid, left[0], depth + 1, left[2]))
        heapq.heappush(heap, (-right[1], mid, b, right[0], depth + 1, right[2]))


def gauss_legendre(n: int):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)
