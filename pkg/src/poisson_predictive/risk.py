"""Kullback-Leibler risks of Poisson predictive distributions.

Risk here is ``E_x[ KL(p(y | lambda) || p_hat(y | x)) ]`` with
``x ~ Poisson(a lambda)`` and ``y ~ Poisson(b lambda)``.  For priors of
the ``(alpha, beta)`` family the risk difference between two priors with
equal ``beta`` depends on ``lambda`` only through ``mu = sum(lambda)``, and
the totals risk has the one-dimensional representation evaluated by
:func:`exact_total_risk`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, GuardError
from .model import MeanVector, ModelConfig, PriorAlphaBeta
from .numerics.poisson import (
    log_poisson_pmf,
    poisson_expectation,
    poisson_quantile_window,
    poisson_weights,
    truncation_point,
)
from .numerics.quadrature import integrate
from .numerics.rng import RngStream, sample_poisson
from .numerics.special import log_gamma, log_gamma_ratio
from .numerics.tolerance import DEFAULT_TOLERANCE, Tolerance

METHODS = ("exact-1d", "brute-force", "monte-carlo")
BRUTE_MAX_D = 3
BRUTE_MAX_RATE = 30.0


@dataclass(frozen=True)
class RiskEstimate:
    """A risk value with its standard error and the method that produced it.

    Deterministic methods carry ``std_error == 0`` and ``n_samples == 0``.
    A Monte Carlo estimate may also have zero standard error when every
    sample gives the same loss (for instance at ``lambda = 0``).
    """

    value: float
    std_error: float
    method: str
    n_samples: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.std_error >= 0:
            raise DomainError(f"std_error must be >= 0, got {self.std_error!r}")
        if self.method != "monte-carlo" and (self.std_error != 0 or self.n_samples != 0):
            raise DomainError(f"{self.method} estimates carry no sampling error")
        if self.method == "monte-carlo" and self.n_samples < 1:
            raise DomainError("monte-carlo estimates need n_samples >= 1")

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "method": self.method,
            "n_samples": self.n_samples,
            "diagnostics": dict(self.diagnostics),
        }


@dataclass(frozen=True)
class RiskCurve:
    """Values of a risk functional along an increasing grid of total means."""

    mu_grid: tuple[float, ...]
    values: tuple[float, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        grid = tuple(float(m) for m in self.mu_grid)
        vals = tuple(float(v) for v in self.values)
        if len(grid) != len(vals):
            raise DomainError("mu_grid and values lengths differ")
        if any(m < 0 for m in grid):
            raise DomainError("mu_grid must be nonnegative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("mu_grid must be strictly increasing")
        object.__setattr__(self, "mu_grid", grid)
        object.__setattr__(self, "values", vals)


def kl_poisson_vec(lambda_true: MeanVector, lambda_hat: Sequence[float], b: float) -> float:
    """``sum_i b (hat_i - lam_i - lam_i log(hat_i / lam_i))``, the KL of product Poissons.

    Terms with ``lam_i = 0`` reduce to ``b hat_i``; a zero ``hat_i`` facing
    a positive ``lam_i`` makes the divergence infinite.
    """
    lam = lambda_true.lambdas
    hat = tuple(float(v) for v in lambda_hat)
    if len(hat) != len(lam):
        raise DomainError("lambda_true and lambda_hat lengths differ")
    terms = []
    for li, hi in zip(lam, hat):
        if li == 0.0:
            terms.append(b * hi)
        elif hi == 0.0:
            return math.inf
        else:
            terms.append(b * (hi - li - li * math.log(hi / li)))
    return math.fsum(terms)


def _check_exposures(a: float, b: float, mu: float) -> None:
    if not a > 0 or not b > 0:
        raise DomainError(f"exposures must be positive, got a={a!r}, b={b!r}")
    if not mu >= 0 or not math.isfinite(mu):
        raise DomainError(f"mu must be finite and >= 0, got {mu!r}")


def total_risk_integrand(t: float, c: float, mu: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """``sum_z Pois(z; t mu) [ s/t - mu - mu log(s / (t mu)) ]`` with ``s = z + 1 - c``.

    Integrating over ``t`` in ``[a, a + b]`` gives :func:`exact_total_risk`.
    At ``t = a`` and ``c = 0`` this equals the plug-in risk divided by ``b``.
    """
    if mu == 0.0:
        return (1.0 - c) / t
    log_tmu = math.log(t * mu)

    def term(z):
        s = z + 1.0 - c
        return s / t - mu - mu * (np.log(s) - log_tmu)

    return poisson_expectation(term, t * mu, tol, vectorized=True)


def exact_total_risk(c: float, a: float, b: float, mu: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """Risk of the totals predictive with reduction exponent ``c`` at total mean ``mu``.

    Evaluated as ``int_a^{a+b} total_risk_integrand(t) dt``; at ``mu = 0``
    the closed form ``(1 - c) log((a + b)/a)`` is returned.
    """
    if not c < 1:
        raise DomainError(f"reduction exponent c must be < 1, got {c!r}")
    _check_exposures(a, b, mu)
    if mu == 0.0:
        return (1.0 - c) * math.log1p(b / a)
    return integrate(lambda t: total_risk_integrand(t, c, mu, tol), a, a + b, tol)


def lemma2_L(m: float, delta: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """``E[log Gamma(X + 1 + delta) - log Gamma(X + 1)] - delta log m`` for ``X ~ Poisson(m)``.

    Strictly decreasing in ``m`` and diverging as ``m -> 0+``.
    """
    if not m > 0:
        raise DomainError(f"m must be > 0, got {m!r}")
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta!r}")
    mean = poisson_expectation(lambda k: log_gamma_ratio(k + 1.0, delta), m, tol, vectorized=True)
    return mean - delta * math.log(m)


def risk_difference(delta: float, a: float, b: float, mu: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """Risk of the prior with ``c = -delta`` minus the risk of the prior with ``c = 0``.

    Equals ``L(a mu) - L((a + b) mu)`` with ``L = lemma2_L(., delta)``, and
    ``delta log((a + b)/a)`` at ``mu = 0``.  ``delta = 0`` gives 0.
    """
    if not delta >= 0:
        raise DomainError(f"delta must be >= 0, got {delta!r}")
    _check_exposures(a, b, mu)
    if delta == 0.0:
        return 0.0
    if mu == 0.0:
        return delta * math.log1p(b / a)
    return lemma2_L(a * mu, delta, tol) - lemma2_L((a + b) * mu, delta, tol)


def risk_difference_curve(
    delta: float, a: float, b: float, mu_grid: Sequence[float], tol: Tolerance = DEFAULT_TOLERANCE
) -> RiskCurve:
    values = [risk_difference(delta, a, b, m, tol) for m in mu_grid]
    meta = {"delta": delta, "a": a, "b": b, "method": "exact-1d", "tolerance": tol.as_dict()}
    return RiskCurve(tuple(mu_grid), tuple(values), meta)


def plugin_total_risk(a: float, b: float, mu: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """Risk of the plug-in Poisson(``b mu_hat``) with ``mu_hat = (X + 1)/a``, ``X ~ Poisson(a mu)``."""
    _check_exposures(a, b, mu)
    if mu == 0.0:
        return b / a
    log_amu = math.log(a * mu)

    def term(x):
        return (x + 1.0) / a - mu - mu * (np.log(x + 1.0) - log_amu)

    return b * poisson_expectation(term, a * mu, tol, vectorized=True)


def theorem5_gap(a: float, b: float, mu: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """Plug-in totals risk minus the totals risk of the ``c = 0`` Bayesian predictive."""
    return plugin_total_risk(a, b, mu, tol) - exact_total_risk(0.0, a, b, mu, tol)


# ---------------------------------------------------------------- full vectors


def _check_full(prior: PriorAlphaBeta, model: ModelConfig, lam: MeanVector) -> None:
    if prior.d != model.d or len(lam) != model.d:
        raise DomainError("prior, model and lambda dimensions differ")


def _expect_over(fn_rows, keys: np.ndarray, rate: float, tol: Tolerance) -> np.ndarray:
    # E_{y ~ Poisson(rate)} fn(key, y) for every key, via one shared window
    if rate == 0.0:
        return fn_rows(keys[:, None], np.zeros((1, 1)))[:, 0]
    kmax = truncation_point(rate, tol.tail_mass)
    w = poisson_weights(rate, kmax)
    ys = np.arange(kmax + 1, dtype=float)[None, :]
    return fn_rows(keys[:, None], ys) @ w


def _kl_given_x(prior: PriorAlphaBeta, model: ModelConfig, lam: MeanVector, xs: np.ndarray, tol: Tolerance):
    """KL(p(. | lambda) || p_hat(. | x)) for every row of ``xs``.

    The log predictive splits into a function of ``(X, Y)`` plus one
    function of ``(x_i, y_i)`` per coordinate, with ``Y ~ Poisson(b mu)``
    and ``y_i ~ Poisson(b lambda_i)``; each piece is a 1-D expectation.
    """
    a, b = model.a, model.b
    kappa, bsum = prior.kappa, prior.beta_sum
    lab = math.log(a + b)
    log_pa, log_pb = math.log(a) - lab, math.log(b) - lab
    # E[log p(y | lambda) + sum_i log y_i!] = sum_i (b lam_i log(b lam_i) - b lam_i)
    entropy_part = math.fsum(
        b * li * math.log(b * li) - b * li for li in lam.lambdas if li > 0
    )
    totals = xs.sum(axis=1)
    uniq, inv = np.unique(totals, return_inverse=True)
    uf = uniq.astype(float)
    total_part = _expect_over(
        lambda X, Y: log_gamma_ratio(X + kappa, Y) - log_gamma_ratio(X + bsum, Y),
        uf, b * lam.mu, tol,
    )
    log_pred = (uf + kappa) * log_pa + b * lam.mu * log_pb + total_part
    per_sample = log_pred[inv]
    for i, (beta_i, li) in enumerate(zip(prior.beta, lam.lambdas)):
        col = xs[:, i]
        u, inv_i = np.unique(col, return_inverse=True)
        part = _expect_over(lambda X, Y: log_gamma_ratio(X + beta_i, Y), u.astype(float), b * li, tol)
        per_sample = per_sample + part[inv_i]
    return entropy_part - per_sample


def _sample_x(model: ModelConfig, lam: MeanVector, n: int, rng: RngStream) -> np.ndarray:
    rates = np.tile(np.asarray(lam.lambdas) * model.a, n)
    return sample_poisson(rates, rng).reshape(n, model.d)


def _summarize(losses: np.ndarray, n: int, diagnostics: dict) -> RiskEstimate:
    if not np.all(np.isfinite(losses)):
        diagnostics = {**diagnostics, "non_finite_losses": int(np.sum(~np.isfinite(losses)))}
        return RiskEstimate(math.inf, 0.0, "monte-carlo", n, diagnostics)
    if np.all(losses == losses[0]):
        return RiskEstimate(float(losses[0]), 0.0, "monte-carlo", n, diagnostics)
    value = math.fsum(losses.tolist()) / n
    se = float(np.std(losses, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return RiskEstimate(value, se, "monte-carlo", n, diagnostics)


def mc_full_risk(
    prior: PriorAlphaBeta,
    model: ModelConfig,
    lam: MeanVector,
    n: int,
    rng: RngStream,
    y_tail: Tolerance = DEFAULT_TOLERANCE,
) -> RiskEstimate:
    """Monte Carlo risk of the full ``d``-dimensional Bayesian predictive.

    ``x`` is sampled ``n`` times; the inner expectation over ``y`` is
    computed by truncated summation with tail mass ``y_tail.tail_mass``
    per coordinate.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    _check_full(prior, model, lam)
    xs = _sample_x(model, lam, n, rng)
    losses = _kl_given_x(prior, model, lam, xs, y_tail)
    return _summarize(losses, n, {"y_tail_mass_per_coordinate": y_tail.tail_mass})


def mc_risk_difference(
    prior1: PriorAlphaBeta,
    prior2: PriorAlphaBeta,
    model: ModelConfig,
    lam: MeanVector,
    n: int,
    rng: RngStream,
    y_tail: Tolerance = DEFAULT_TOLERANCE,
) -> RiskEstimate:
    """Paired Monte Carlo estimate of ``risk(prior1) - risk(prior2)`` on common ``x`` draws."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    _check_full(prior1, model, lam)
    _check_full(prior2, model, lam)
    xs = _sample_x(model, lam, n, rng)
    diff = _kl_given_x(prior1, model, lam, xs, y_tail) - _kl_given_x(prior2, model, lam, xs, y_tail)
    return _summarize(diff, n, {"y_tail_mass_per_coordinate": y_tail.tail_mass, "paired": True})


def _window(rate: float, tail: float) -> tuple[np.ndarray, np.ndarray]:
    # counts 0..K with their log probabilities
    k = poisson_quantile_window(rate, tail)
    ks = np.arange(k + 1)
    return ks, np.array([log_poisson_pmf(int(j), rate) for j in ks])


def brute_full_risk(
    prior: PriorAlphaBeta, model: ModelConfig, lam: MeanVector, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    """Risk by direct double summation over ``x`` and ``y`` windows.

    Each of the ``2d`` coordinate windows drops at most
    ``tol.tail_mass / (2d)`` probability.  Refuses (``GuardError``) when
    ``d > 3`` or ``a mu`` or ``b mu`` exceeds 30.
    """
    _check_full(prior, model, lam)
    a, b, d = model.a, model.b, model.d
    if d > BRUTE_MAX_D or a * lam.mu > BRUTE_MAX_RATE or b * lam.mu > BRUTE_MAX_RATE:
        raise GuardError(
            f"brute-force risk needs d <= {BRUTE_MAX_D} and a*mu, b*mu <= {BRUTE_MAX_RATE:g}"
        )
    tail = tol.tail_mass / (2 * d)
    xw = [_window(a * li, tail) for li in lam.lambdas]
    yw = [_window(b * li, tail) for li in lam.lambdas]
    # grids over all y in the window product
    y_mesh = np.stack([g.ravel() for g in np.meshgrid(*[k for k, _ in yw], indexing="ij")], axis=1)
    log_py = sum(np.meshgrid(*[lp for _, lp in yw], indexing="ij")).ravel()
    py = np.exp(log_py)
    y_tot = y_mesh.sum(axis=1).astype(float)
    lab = math.log(a + b)
    log_pa, log_pb = math.log(a) - lab, math.log(b) - lab
    kappa, bsum = prior.kappa, prior.beta_sum
    base_y = y_tot * log_pb - np.sum(log_gamma(y_mesh + 1.0), axis=1)
    x_mesh = np.stack([g.ravel() for g in np.meshgrid(*[k for k, _ in xw], indexing="ij")], axis=1)
    log_px = sum(np.meshgrid(*[lp for _, lp in xw], indexing="ij")).ravel()
    x_tot = x_mesh.sum(axis=1)
    y_idx = y_mesh.sum(axis=1)
    # log-gamma tables indexed by (x total, y total) and by (x_i, y_i)
    xt_range = np.arange(x_tot.max() + 1, dtype=float)[:, None]
    yt_range = np.arange(y_idx.max() + 1, dtype=float)[None, :]
    total_table = (
        (xt_range + kappa) * log_pa
        + log_gamma_ratio(xt_range + kappa, yt_range)
        - log_gamma_ratio(xt_range + bsum, yt_range)
    )
    coord_tables = [
        log_gamma_ratio(np.arange(len(xw[i][0]), dtype=float)[:, None] + prior.beta[i],
                        np.arange(len(yw[i][0]), dtype=float)[None, :])
        for i in range(d)
    ]
    terms = []
    # blocks of x rows against the full y grid, bounded at ~2e6 cells per block
    step = max(1, 2_000_000 // len(y_mesh))
    for lo in range(0, len(x_mesh), step):
        block = x_mesh[lo:lo + step]
        log_pred = base_y[None, :] + total_table[x_tot[lo:lo + step]][:, y_idx]
        for i in range(d):
            log_pred = log_pred + coord_tables[i][block[:, i]][:, y_mesh[:, i]]
        inner = (log_py[None, :] - log_pred) @ py
        terms.extend((np.exp(log_px[lo:lo + step]) * inner).tolist())
    return math.fsum(terms)
