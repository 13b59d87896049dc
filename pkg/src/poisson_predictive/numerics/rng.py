"""Platform-stable random streams and the samplers built on them.

The generator is SplitMix64 used in counter mode: draw ``i`` of a stream
is ``mix(key + (i + 1) * GOLDEN)``, where ``key`` is derived from the
``(seed, stream_id)`` pair.  Draws are pure functions of their counter,
so blocks of uniforms are produced with vectorized uint64 arithmetic and
sequences are bit-identical wherever IEEE doubles and wrapping uint64
multiplication are available.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from .poisson import poisson_weights, truncation_point
from .special import log_gamma

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _mix_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


class RngStream:
    """A deterministic stream of uniforms identified by ``(seed, stream_id)``.

    A stream is stateful (it advances a counter) and must not be shared
    between concurrent tasks; use :meth:`child` to hand each task its own.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK
        self.stream_id = int(stream_id) & _MASK
        self._key = _mix_int(self.seed ^ _mix_int(self.stream_id + _GOLDEN))
        self.counter = 0

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

    def child(self, index: int) -> "RngStream":
        """Independent stream for sub-task ``index`` (same seed, derived id)."""
        return RngStream(self.seed, _mix_int(self.stream_id * _GOLDEN + int(index) + 1))

    def bits(self, n: int) -> np.ndarray:
        ctr = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            return _mix_array(np.uint64(self._key) + ctr * np.uint64(_GOLDEN))

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` doubles in the open interval (0, 1)."""
        top = (self.bits(n) >> np.uint64(11)).astype(np.float64)
        return (top + 0.5) * (2.0 ** -53)

    def normals(self, n: int) -> np.ndarray:
        # Box-Muller, cosine branch only: 2 uniforms per normal
        u = self.uniforms(2 * n)
        return np.sqrt(-2.0 * np.log(u[0::2])) * np.cos(2.0 * math.pi * u[1::2])


def _poisson_inversion(m: float, n: int, rng: RngStream) -> np.ndarray:
    kmax = truncation_point(m, 1e-17)
    cdf = np.cumsum(poisson_weights(m, kmax))
    u = rng.uniforms(n)
    # u beyond the last cdf entry has probability < 1e-17; it maps to kmax
    return np.minimum(np.searchsorted(cdf, u, side="right"), kmax).astype(np.int64)


def _poisson_search(m: np.ndarray, rng: RngStream) -> np.ndarray:
    # inversion by sequential search, for per-draw rates m <= 30
    u = rng.uniforms(m.size)
    k = np.zeros(m.size, dtype=np.int64)
    p = np.exp(-m)
    cdf = p.copy()
    active = u > cdf
    while active.any():
        idx = np.flatnonzero(active)
        k[idx] += 1
        p[idx] *= m[idx] / k[idx]
        cdf[idx] += p[idx]
        # p underflows to zero past the tail; stop there
        active[idx] = (u[idx] > cdf[idx]) & (p[idx] > 0)
    return k


def _poisson_ptrs(m: np.ndarray, rng: RngStream) -> np.ndarray:
    # Hormann's transformed rejection with squeeze, for rates m > 30
    slam = np.sqrt(m)
    loglam = np.log(m)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2)
    out = np.empty(m.size, dtype=np.int64)
    pending = np.arange(m.size)
    while pending.size:
        k = pending.size
        draws = rng.uniforms(2 * k)
        u = draws[0::2] - 0.5
        v = draws[1::2]
        mp, ap, bp = m[pending], a[pending], b[pending]
        us = 0.5 - np.abs(u)
        kk = np.floor((2 * ap / us + bp) * u + mp + 0.43)
        quick = (us >= 0.07) & (v <= vr[pending])
        valid = (kk >= 0) & ~((us < 0.013) & (v > us))
        safe_k = np.where(kk >= 0, kk, 0.0)
        lhs = np.log(v) + np.log(invalpha[pending]) - np.log(ap / (us * us) + bp)
        rhs = -mp + safe_k * loglam[pending] - log_gamma(safe_k + 1.0)
        accept = quick | (valid & (lhs <= rhs))
        out[pending[accept]] = kk[accept].astype(np.int64)
        pending = pending[~accept]
    return out


def sample_poisson(m, rng: RngStream, size: int | None = None):
    """Poisson draws: inversion for rates ``<= 30``, transformed rejection above.

    ``m`` may be a scalar (``size`` draws at one rate) or an array of
    per-draw rates, in which case ``size`` is ignored.
    """
    rates = np.asarray(m, dtype=float)
    if np.any(~(rates >= 0)) or np.any(~np.isfinite(rates)):
        raise DomainError("Poisson rates must be finite and >= 0")
    if rates.ndim == 0:
        n = 1 if size is None else int(size)
        mv = float(rates)
        if mv == 0.0:
            draws = np.zeros(n, dtype=np.int64)
        elif mv <= 30.0:
            draws = _poisson_inversion(mv, n, rng)
        else:
            draws = _poisson_ptrs(np.full(n, mv), rng)
        return int(draws[0]) if size is None else draws
    flat = rates.ravel()
    out = np.zeros(flat.size, dtype=np.int64)
    low = (flat > 0) & (flat <= 30.0)
    high = flat > 30.0
    if low.any():
        out[low] = _poisson_search(flat[low], rng)
    if high.any():
        out[high] = _poisson_ptrs(flat[high], rng)
    return out.reshape(rates.shape)


def _gamma_unit(shape: np.ndarray, rng: RngStream) -> np.ndarray:
    # Marsaglia-Tsang squeeze method for shape >= 1, unit rate
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty_like(shape)
    pending = np.arange(shape.size)
    while pending.size:
        k = pending.size
        x = rng.normals(k)
        u = rng.uniforms(k)
        dp, cp = d[pending], c[pending]
        v = (1.0 + cp * x) ** 3
        pos = v > 0
        safe_v = np.where(pos, v, 1.0)
        squeeze = u < 1.0 - 0.0331 * x ** 4
        full = np.log(u) < 0.5 * x * x + dp * (1.0 - safe_v + np.log(safe_v))
        accept = pos & (squeeze | full)
        out[pending[accept]] = dp[accept] * safe_v[accept]
        pending = pending[~accept]
    return out


def sample_gamma(shape, rate: float, rng: RngStream, size: int | None = None):
    """Gamma(shape, rate) draws; ``shape`` may be an array of per-draw shapes.

    Shapes below one are boosted: ``G(shape) = G(shape + 1) * U**(1/shape)``.
    """
    if not rate > 0:
        raise DomainError(f"gamma rate must be > 0, got {rate!r}")
    shape_arr = np.asarray(shape, dtype=float)
    if np.any(~(shape_arr > 0)):
        raise DomainError("gamma shape must be > 0")
    if size is not None:
        shape_arr = np.broadcast_to(shape_arr, (int(size),))
    flat = np.atleast_1d(shape_arr).astype(float).ravel()
    small = flat < 1.0
    draws = _gamma_unit(np.where(small, flat + 1.0, flat), rng)
    if small.any():
        u = rng.uniforms(int(small.sum()))
        draws[small] *= u ** (1.0 / flat[small])
    draws /= rate
    if size is None and shape_arr.ndim == 0:
        return float(draws[0])
    return draws.reshape(shape_arr.shape)


def sample_dirichlet(params, rng: RngStream, size: int | None = None) -> np.ndarray:
    """Dirichlet draws by normalizing independent unit-rate gammas.

    The last component is set to one minus the others so each row sums to
    exactly 1.0 in floating point.
    """
    alpha = np.asarray(params, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0 or np.any(~(alpha > 0)):
        raise DomainError("Dirichlet parameters must be a nonempty sequence of positive reals")
    n = 1 if size is None else int(size)
    g = sample_gamma(np.tile(alpha, n), 1.0, rng).reshape(n, alpha.size)
    p = g / g.sum(axis=1, keepdims=True)
    if alpha.size > 1:
        head = p[:, :-1]
        p[:, -1] = np.maximum(0.0, 1.0 - head.sum(axis=1))
    else:
        p[:, 0] = 1.0
    return p[0] if size is None else p
