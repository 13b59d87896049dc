"""Bayes-risk gap between a prior and its truncated approximations.

For a prior whose total-mean part is ``mu**(-c)``, the truncated prior
reweights it by ``g_l(mu) = h_l(mu)**2 / 2`` where ``h_l`` is 1 on
``[0, 1]``, falls like ``1 - log(mu)/log(l)`` on ``[1, l]`` and vanishes
beyond ``l``.  :func:`bayes_risk_gap` integrates the excess risk of the
untruncated Bayes rule over the truncated prior; :func:`gap_upper_bound`
is an analytic bound on it that tends to zero as ``l`` grows.

Notation used below: ``s = z + 1 - c`` and ``E_k[f]`` is the expectation
of ``f(mu)`` under ``Gamma(shape k, rate t)``.  Then

    int exp(-t mu) (t mu)**(k - 1) f(mu) dmu = Gamma(k)/t * E_k[f],

which keeps all moments on a normalized scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .numerics.poisson import truncation_point
from .numerics.quadrature import gauss_legendre, integrate
from .numerics.special import log_gamma, log_gamma_ratio, regularized_lower_gamma
from .numerics.tolerance import DEFAULT_TOLERANCE, Tolerance

# composite Gauss-Legendre used for the per-z window integrals
_PANELS = 4
_NODES, _WEIGHTS = gauss_legendre(32)
# half-width of the window around a gamma density, in standard deviations
_WINDOW_SD = 12.0
_WINDOW_PAD = 30.0


@dataclass(frozen=True)
class BlythConfig:
    """Truncation level ``l``, reduction exponent ``c`` and exposures."""

    l: float
    c: float = 0.0
    a: float = 1.0
    b: float = 1.0
    tol: Tolerance = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not self.l > 1 or not math.isfinite(self.l):
            raise DomainError(f"l must be a finite real > 1, got {self.l!r}")
        if not 0.0 <= self.c < 1.0:
            raise DomainError(f"c must lie in [0, 1), got {self.c!r}")
        if not self.a > 0 or not self.b > 0:
            raise DomainError(f"exposures must be positive, got a={self.a!r}, b={self.b!r}")

    @property
    def log_l(self) -> float:
        return math.log(self.l)


def h_l(mu, l: float):
    """1 on ``[0, 1]``, ``1 - log(mu)/log(l)`` on ``(1, l]``, 0 above ``l``."""
    if not l > 1:
        raise DomainError(f"l must be > 1, got {l!r}")
    m = np.asarray(mu, dtype=float)
    if np.any(m < 0):
        raise DomainError("mu must be >= 0")
    with np.errstate(divide="ignore"):
        mid = 1.0 - np.log(np.maximum(m, 1.0)) / math.log(l)
    out = np.where(m <= 1.0, 1.0, np.where(m <= l, mid, 0.0))
    return float(out) if out.ndim == 0 else out


def _g_and_slope(mu: np.ndarray, log_l: float):
    # g = h^2/2 and g' = h h' with h' = -1/(mu log l), valid for 1 <= mu <= l
    h = 1.0 - np.log(mu) / log_l
    return 0.5 * h * h, -h / (mu * log_l)


def _log_gamma_density(mu, k, t):
    return k * np.log(t * mu) - t * mu - log_gamma(k) - np.log(mu)


def _tight(tol: Tolerance) -> Tolerance:
    # moments can be tiny; converge on relative error only
    return replace(tol, abs_tol=1e-300)


def _middle_expectation(k: float, t: float, cfg: BlythConfig, slope: bool) -> float:
    # E_k[g 1{1<mu<l}] (or E_k[g']) by adaptive quadrature in u = log(mu)
    log_l = cfg.log_l
    lg = float(log_gamma(k))

    def f(u):
        mu = np.exp(u)
        g, gp = _g_and_slope(mu, log_l)
        dens = np.exp(k * np.log(t * mu) - t * mu - lg)
        # dens is the gamma density times mu, the Jacobian of u = log(mu)
        return (gp if slope else g) * dens

    peak = math.log(k / t)
    points = (peak,) if 0.0 < peak < log_l else ()
    return integrate(f, 0.0, log_l, _tight(cfg.tol), points=points, vectorized=True)


def gamma_expectation(k: float, t: float, cfg: BlythConfig, slope: bool = False) -> float:
    """``E_k[g_l]`` (or ``E_k[g_l']`` with ``slope=True``) under ``Gamma(k, rate t)``."""
    middle = _middle_expectation(k, t, cfg, slope)
    if slope:
        return middle
    return 0.5 * regularized_lower_gamma(k, t) + middle


def weighted_moment(z: int, t: float, power_shift: int, cfg: BlythConfig) -> float:
    """``int_0^inf exp(-t mu) (t mu)**(z - c + power_shift) g_l(mu) dmu``.

    The ``[0, 1]`` piece is ``Gamma(k) P(k, t) / (2t)`` with
    ``k = z + 1 - c + power_shift``; the ``[1, l]`` piece is integrated
    adaptively in ``log(mu)``.
    """
    if z < 0 or int(z) != z:
        raise DomainError(f"z must be a nonnegative integer, got {z!r}")
    if power_shift not in (0, 1):
        raise DomainError(f"power_shift must be 0 or 1, got {power_shift!r}")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t!r}")
    k = z + 1.0 - cfg.c + power_shift
    return math.exp(float(log_gamma(k))) / t * gamma_expectation(k, t, cfg)


def mu_hat(z: int, t: float, cfg: BlythConfig) -> float:
    """Bayes estimate of the total mean under the truncated prior.

    ``s/t + int exp(-t mu)(t mu)**s g' dmu / (t**2 int exp(-t mu)(t mu)**(s-1) g dmu)``
    with ``s = z + 1 - c``; never exceeds ``s/t`` since ``g' <= 0``.
    """
    if z < 0 or int(z) != z:
        raise DomainError(f"z must be a nonnegative integer, got {z!r}")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t!r}")
    s = z + 1.0 - cfg.c
    correction = gamma_expectation(s + 1.0, t, cfg, slope=True) / (t * gamma_expectation(s, t, cfg))
    return s / t * (1.0 + correction)


def mu_hat_posterior_mean(z: int, t: float, cfg: BlythConfig) -> float:
    """The same estimate as a posterior-mean ratio, ``(s/t) E_{s+1}[g] / E_s[g]``."""
    s = z + 1.0 - cfg.c
    return s / t * gamma_expectation(s + 1.0, t, cfg) / gamma_expectation(s, t, cfg)


def _excess(q):
    # (r - 1) - log(r) with q = r - 1 >= 0, series near 0 to avoid cancellation
    q = np.asarray(q, dtype=float)
    series = q * q * (0.5 - q * (1.0 / 3.0 - q * (0.25 - q / 5.0)))
    return np.where(q < 1e-3, series, q - np.log1p(q))


def gap_terms(t: float, cfg: BlythConfig, zmax: int | None = None) -> np.ndarray:
    """Per-``z`` contributions to the gap integrand at exposure ``t``.

    The ``mu``-integrated term for count ``z`` reduces exactly to

        t**(c-2) Gamma(s+1)/z! E_{s+1}[g] phi(r),  phi(r) = r - 1 - log r,

    where ``r - 1 = -E_{s+1}[g'] / (t E_{s+1}[g]) >= 0``.  Each term is
    therefore nonnegative.  Window integrals over ``[1, l]`` use composite
    Gauss-Legendre rules on a band around the ``Gamma(s+1, t)`` bulk.
    """
    c, l, log_l = cfg.c, cfg.l, cfg.log_l
    if zmax is None:
        zmax = truncation_point(t * l, cfg.tol.tail_mass) + 20
    z = np.arange(zmax + 1, dtype=float)
    k = z + 2.0 - c
    spread = _WINDOW_SD * np.sqrt(k) + _WINDOW_PAD
    lo = np.clip((k - spread) / t, 1.0, l)
    hi = np.clip((k + spread) / t, 1.0, l)
    width = (hi - lo) / _PANELS
    # nodes: (n_z, panels * 32)
    offs = (np.arange(_PANELS)[:, None] + 0.5 * (_NODES[None, :] + 1.0)).ravel()
    mu = lo[:, None] + width[:, None] * offs[None, :]
    w = (0.5 * width)[:, None] * np.tile(_WEIGHTS, _PANELS)[None, :]
    g, gp = _g_and_slope(mu, log_l)
    dens = np.exp(_log_gamma_density(mu, k[:, None], t))
    e_g = 0.5 * regularized_lower_gamma(k, t) + np.sum(w * g * dens, axis=1)
    e_gp = np.sum(w * gp * dens, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(e_g > 0, -e_gp / (t * e_g), 0.0)
    scale = np.exp((c - 2.0) * math.log(t) + log_gamma_ratio(z + 1.0, 1.0 - c))
    return scale * e_g * _excess(np.maximum(q, 0.0))


def gap_integrand(t: float, cfg: BlythConfig) -> float:
    return math.fsum(gap_terms(t, cfg).tolist())


def bayes_risk_gap(cfg: BlythConfig) -> float:
    """Integrated excess Bayes risk of the untruncated rule over ``t`` in ``[a, a+b]``.

    Nonnegative; values in ``[-1e-13, 0)`` from roundoff are reported as 0.
    """
    value = integrate(lambda t: gap_integrand(t, cfg), cfg.a, cfg.a + cfg.b, _tight(cfg.tol))
    if -1e-13 <= value < 0.0:
        return 0.0
    return value


def gap_upper_bound(cfg: BlythConfig) -> float:
    """``2/((1 - c) log l) * (1/a - 1/(a + b))``."""
    return 2.0 / ((1.0 - cfg.c) * cfg.log_l) * (1.0 / cfg.a - 1.0 / (cfg.a + cfg.b))
