"""Poisson probabilities in log space and certified truncated expectations."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import DomainError, EvaluationError
from .special import log_gamma
from .tolerance import DEFAULT_TOLERANCE, Tolerance

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirlerr(n: int) -> float:
    # log(n!) - log(sqrt(2 pi n) (n/e)^n)
    if n <= 15:
        return log_gamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _HALF_LOG_2PI
    nn = float(n) * n
    return (1.0 / 12 - (1.0 / 360 - (1.0 / 1260 - (1.0 / 1680 - 1.0 / (1188 * nn)) / nn) / nn) / nn) / n


def _bd0(x: float, m: float) -> float:
    # x log(x/m) + m - x, computed without cancellation near x = m
    if abs(x - m) < 0.1 * (x + m):
        v = (x - m) / (x + m)
        s = (x - m) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s_next = s + ej / (2 * j + 1)
            if s_next == s:
                return s
            s = s_next
            j += 1
    return x * math.log(x / m) + m - x


def log_poisson_pmf(k: int, m: float) -> float:
    """``log(exp(-m) m**k / k!)``, with the degenerate law at ``m = 0``.

    Uses the saddle-point form (deviance plus Stirling remainder), which
    keeps full relative accuracy even when ``k`` and ``m`` are large.
    """
    if m < 0 or math.isnan(m):
        raise DomainError(f"Poisson rate must be >= 0, got {m!r}")
    if k < 0 or int(k) != k:
        raise DomainError(f"count must be a nonnegative integer, got {k!r}")
    k = int(k)
    if m == 0.0:
        return 0.0 if k == 0 else -math.inf
    if k == 0:
        return -m
    return -_stirlerr(k) - _bd0(float(k), m) - 0.5 * math.log(2.0 * math.pi * k)


def truncation_point(m: float, tail_mass: float) -> int:
    """Upper summation limit ``K`` with ``P(X > K) <= tail_mass`` for ``X ~ Poisson(m)``.

    Starts from ``ceil(m + 12 sqrt(m + 1) + 30)`` and grows until the
    Chernoff bound ``exp(-m) (e m / K)**K`` certifies the tail.
    """
    if m < 0:
        raise DomainError(f"Poisson rate must be >= 0, got {m!r}")
    if m == 0.0:
        return 0
    k = math.ceil(m + 12.0 * math.sqrt(m + 1.0) + 30.0)
    log_target = math.log(tail_mass)
    while -m + k * (1.0 + math.log(m) - math.log(k)) > log_target:
        k = math.ceil(1.25 * k) + 1
    return k


def poisson_weights(m: float, kmax: int) -> np.ndarray:
    """Poisson(m) probabilities for ``k = 0..kmax``.

    The mode is evaluated directly and the rest by the ratio recurrences
    ``p(k+1) = p(k) m/(k+1)``, which avoids differencing large logs.
    """
    if m < 0:
        raise DomainError(f"Poisson rate must be >= 0, got {m!r}")
    w = np.zeros(kmax + 1)
    if m == 0.0:
        w[0] = 1.0
        return w
    mode = min(int(math.floor(m)), kmax)
    ks = np.arange(kmax + 1, dtype=float)
    p_mode = math.exp(log_poisson_pmf(mode, m))
    if mode < kmax:
        w[mode + 1:] = p_mode * np.cumprod(m / ks[mode + 1:])
    w[mode] = p_mode
    if mode > 0:
        down = np.cumprod(ks[mode:0:-1] / m)
        w[mode - 1::-1] = p_mode * down
    return w


def poisson_expectation(
    f: Callable,
    m: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
    *,
    vectorized: bool = False,
) -> float:
    """Truncated ``E[f(X)]`` for ``X ~ Poisson(m)``.

    Parameters
    ----------
    f : callable
        Function of a count.  With ``vectorized=True`` it receives an
        integer array ``0..K`` and must return an array of the same length.
    m : float
        Nonnegative Poisson mean.  ``m = 0`` returns ``f(0)`` exactly.
    tol : Tolerance
        ``tol.tail_mass`` bounds the discarded upper-tail probability.

    Raises
    ------
    EvaluationError
        If ``f`` is not finite somewhere inside the truncation window.
    """
    if m < 0:
        raise DomainError(f"Poisson rate must be >= 0, got {m!r}")
    if m == 0.0:
        value = float(f(np.zeros(1, dtype=np.int64))[0]) if vectorized else float(f(0))
        if not math.isfinite(value):
            raise EvaluationError("f(0) is not finite", index=0)
        return value
    kmax = truncation_point(m, tol.tail_mass)
    ks = np.arange(kmax + 1, dtype=np.int64)
    if vectorized:
        values = np.asarray(f(ks), dtype=float)
    else:
        values = np.array([f(int(k)) for k in ks], dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        k = int(ks[np.argmax(bad)])
        raise EvaluationError(f"f({k}) is not finite", index=k)
    return float(np.sum(poisson_weights(m, kmax) * values))


def poisson_quantile_window(m: float, tail_mass: float) -> int:
    """Smallest ``K`` whose exact upper tail ``P(X > K)`` is at most ``tail_mass``.

    Tighter than :func:`truncation_point`; used where the window size
    enters a product over coordinates.
    """
    if m == 0.0:
        return 0
    kmax = truncation_point(m, min(tail_mass, 1e-16) * 1e-3)
    w = poisson_weights(m, kmax)
    # upper tails summed from the far end to keep small terms
    tails = np.cumsum(w[::-1])[::-1]
    ok = np.flatnonzero(np.append(tails[1:], 0.0) <= tail_mass)
    return int(ok[0])
