"""Predictive distributions for ``y`` given ``x``.

``y`` and ``x`` are independent Poisson vectors with means ``b * lambda``
and ``a * lambda``.  The Bayesian predictive under a prior of the
``(alpha, beta)`` family has the closed form implemented in
:func:`log_predictive_pmf`; its law for the total ``sum(y)`` depends on
the prior only through ``c`` (:func:`log_total_predictive_pmf`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, GuardError
from .model import Counts, ModelConfig, PriorAlphaBeta, as_counts
from .numerics.poisson import log_poisson_pmf
from .numerics.rng import RngStream, sample_dirichlet, sample_gamma, sample_poisson
from .numerics.special import log_gamma, log_gamma_ratio

MAX_TABLE_ENTRIES = 10_000_000


@dataclass(frozen=True)
class PredictivePmfSpec:
    """A Bayesian predictive: prior, exposures, and the conditioning ``x``."""

    prior: PriorAlphaBeta
    model: ModelConfig
    x: Counts

    def __post_init__(self):
        object.__setattr__(self, "x", as_counts(self.x))
        if self.prior.d != self.model.d:
            raise DomainError(f"prior has dimension {self.prior.d}, model has d={self.model.d}")
        self.x.check_dim(self.model.d, "x")


@dataclass(frozen=True)
class PlugInSpec:
    """Product-Poisson predictive with means ``b * lambda_hat``."""

    lambda_hat: tuple[float, ...]
    b: float

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambda_hat)
        if any(not v >= 0 or not math.isfinite(v) for v in lam):
            raise DomainError(f"plug-in means must be finite and >= 0, got {lam!r}")
        if not self.b > 0:
            raise DomainError(f"b must be > 0, got {self.b!r}")
        object.__setattr__(self, "lambda_hat", lam)

    @property
    def has_zero_mean(self) -> bool:
        """A zero entry gives infinite KL risk wherever the true mean is positive."""
        return any(v == 0.0 for v in self.lambda_hat)


def _log_share(a: float, b: float) -> tuple[float, float]:
    lab = math.log(a + b)
    return math.log(a) - lab, math.log(b) - lab


def log_predictive_rows(spec: PredictivePmfSpec, ys: np.ndarray) -> np.ndarray:
    """Vectorized :func:`log_predictive_pmf` over the rows of an ``(n, d)`` array."""
    prior, model = spec.prior, spec.model
    ys = np.asarray(ys, dtype=float)
    if ys.ndim != 2 or ys.shape[1] != model.d:
        raise DomainError(f"y rows must have length d={model.d}")
    xv = np.asarray(spec.x.values, dtype=float)
    x_tot = float(spec.x.total)
    y_tot = ys.sum(axis=1)
    log_pa, log_pb = _log_share(model.a, model.b)
    beta = np.asarray(prior.beta)
    out = (x_tot + prior.kappa) * log_pa + y_tot * log_pb
    out = out + log_gamma_ratio(x_tot + prior.kappa, y_tot)
    out = out - log_gamma_ratio(x_tot + prior.beta_sum, y_tot)
    out = out + np.sum(log_gamma_ratio(xv + beta, ys) - log_gamma(ys + 1.0), axis=1)
    return out


def log_predictive_pmf(spec: PredictivePmfSpec, y) -> float:
    """Log probability of ``y`` under the Bayesian predictive.

    With ``X = sum x``, ``Y = sum y``, ``B = sum beta`` and
    ``k = B - alpha``::

        (a/(a+b))**(X + k) * (b/(a+b))**Y
            * Gamma(X + Y + k) Gamma(X + B) / (Gamma(X + k) Gamma(X + Y + B))
            * prod_i Gamma(x_i + y_i + beta_i) / (Gamma(x_i + beta_i) y_i!)
    """
    y = as_counts(y)
    y.check_dim(spec.model.d, "y")
    return float(log_predictive_rows(spec, np.asarray([y.values]))[0])


def log_total_predictive_pmf(c: float, a: float, b: float, x_total: int, y_total: int) -> float:
    """Log pmf of ``sum(y)`` given ``sum(x)``: a negative binomial law.

    ``(a/(a+b))**(X+1-c) (b/(a+b))**Y Gamma(X+Y+1-c) / (Gamma(X+1-c) Y!)``
    """
    if not c < 1:
        raise DomainError(f"reduction exponent c must be < 1, got {c!r}")
    if not a > 0 or not b > 0:
        raise DomainError("exposures must be positive")
    if x_total < 0 or y_total < 0:
        raise DomainError("totals must be nonnegative")
    log_pa, log_pb = _log_share(a, b)
    shape = x_total + 1.0 - c
    return (
        shape * log_pa
        + y_total * log_pb
        + log_gamma_ratio(shape, float(y_total))
        - log_gamma(y_total + 1.0)
    )


def _compositions(n: int, d: int) -> np.ndarray:
    # all length-d nonnegative integer vectors summing to n, lexicographic order
    if d == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for first in range(n + 1):
        rest = _compositions(n - first, d - 1)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def predictive_table(spec: PredictivePmfSpec, coverage: float) -> list[tuple[Counts, float]]:
    """Enumerate outcomes until their total probability reaches ``coverage``.

    Outcomes are visited by increasing ``sum(y)`` and, within one total,
    in lexicographic order.  The running mass is compared against
    ``coverage`` up to a few units of floating-point roundoff.

    Raises
    ------
    GuardError
        If more than ``MAX_TABLE_ENTRIES`` rows would be needed.
    """
    if not 0.0 < coverage <= 1.0 - 1e-12:
        raise DomainError(f"coverage must lie in (0, 1 - 1e-12], got {coverage!r}")
    d = spec.model.d
    threshold = coverage - 4.0 * np.finfo(float).eps
    # sum(y) follows the totals law for every beta, so the last total needed
    # is known before enumerating; all outcomes below it must be listed
    c = spec.prior.c
    last, mass = 0, 0.0
    while True:
        mass += math.exp(log_total_predictive_pmf(c, spec.model.a, spec.model.b, spec.x.total, last))
        if mass >= threshold:
            break
        last += 1
    if math.comb(last - 1 + d, d) + 1 > MAX_TABLE_ENTRIES:
        raise GuardError(
            f"predictive table would exceed {MAX_TABLE_ENTRIES} entries at coverage {coverage}"
        )
    rows: list[tuple[Counts, float]] = []
    mass = 0.0
    total = 0
    while True:
        block = _compositions(total, d)
        probs = np.exp(log_predictive_rows(spec, block))
        for y, p in zip(block.tolist(), probs.tolist()):
            rows.append((Counts(y), p))
            mass += p
            if mass >= threshold:
                return rows
            if len(rows) >= MAX_TABLE_ENTRIES:
                raise GuardError(
                    f"predictive table would exceed {MAX_TABLE_ENTRIES} entries at coverage {coverage}"
                )
        total += 1


def sample_predictive(spec: PredictivePmfSpec, n: int, rng: RngStream) -> list[Counts]:
    """Exact draws from the Bayesian predictive.

    The posterior factorizes into ``mu ~ Gamma(sum x + 1 - c, rate a)`` and
    ``w ~ Dirichlet(x + beta)``; each draw then sets ``lambda = mu * w`` and
    samples ``y_i ~ Poisson(b * lambda_i)``.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n!r}")
    if n == 0:
        return []
    prior, model = spec.prior, spec.model
    shape = spec.x.total + prior.kappa
    mu = sample_gamma(shape, model.a, rng, size=n)
    w = sample_dirichlet(np.asarray(spec.x.values, dtype=float) + np.asarray(prior.beta), rng, size=n)
    rates = model.b * mu[:, None] * w
    ys = sample_poisson(rates, rng)
    return [Counts(row) for row in ys.tolist()]


def gb_estimate(x, a: float, d: int) -> tuple[float, ...]:
    """Generalized Bayes (posterior mean) estimate of ``lambda`` under the shrinkage prior.

    ``lambda_i = (1/a) * (X + 1)/(X + d/2) * (x_i + 1/2)`` with ``X = sum x``.
    """
    x = as_counts(x)
    x.check_dim(d, "x")
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a!r}")
    factor = (x.total + 1.0) / (x.total + d / 2.0) / a
    return tuple(factor * (xi + 0.5) for xi in x.values)


def log_plugin_pmf(plug: PlugInSpec, y) -> float:
    """Log pmf of ``y`` under independent Poisson(``b * lambda_hat_i``) laws.

    Returns ``-inf`` when some ``lambda_hat_i = 0`` has ``y_i > 0``.
    """
    y = as_counts(y)
    if len(y) != len(plug.lambda_hat):
        raise DomainError("y and lambda_hat lengths differ")
    return math.fsum(log_poisson_pmf(yi, plug.b * li) for yi, li in zip(y.values, plug.lambda_hat))


def mixed_weights(x) -> tuple[float, ...]:
    """Split proportions ``(x_i + 1/2) / (sum x + d/2)``."""
    x = as_counts(x)
    denom = x.total + len(x) / 2.0
    return tuple((xi + 0.5) / denom for xi in x.values)


def log_mixed_pmf(x, y, model: ModelConfig) -> float:
    """Totals predictive of the shrinkage prior composed with a multinomial split.

    ``p(Y | X)`` with ``c = 0`` times ``Multinomial(y; Y, w_hat)``, where
    ``w_hat`` comes from :func:`mixed_weights`.  This predictive has
    strictly smaller risk than the plug-in at the generalized Bayes
    estimate.
    """
    x = as_counts(x)
    y = as_counts(y)
    x.check_dim(model.d, "x")
    y.check_dim(model.d, "y")
    w = mixed_weights(x)
    total = log_total_predictive_pmf(0.0, model.a, model.b, x.total, y.total)
    multinom = log_gamma(y.total + 1.0) + math.fsum(
        yi * math.log(wi) - log_gamma(yi + 1.0) for yi, wi in zip(y.values, w)
    )
    return total + multinom


def table_mass(rows: Sequence[tuple[Counts, float]]) -> float:
    return math.fsum(p for _, p in rows)
