"""Domain types for the Poisson prediction problem and the prior family.

The prior family has density proportional to

    prod_i lambda_i**(beta_i - 1) / (lambda_1 + ... + lambda_d)**alpha

on the positive orthant.  Under the change of variables ``mu = sum(lambda)``,
``w = lambda / mu`` it splits into ``mu**(-c)`` times a Dirichlet(beta)
density on ``w``, with ``c = alpha - sum(beta) + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DomainError, ProprietyError
from .numerics.special import log_gamma, log_gamma_ratio


@dataclass(frozen=True)
class ModelConfig:
    """Dimension ``d`` with observed exposure ``a`` and future exposure ``b``."""

    d: int
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        if not self.a > 0 or not self.b > 0:
            raise DomainError(f"exposures must be positive, got a={self.a!r}, b={self.b!r}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("exposures must be finite")


@dataclass(frozen=True)
class Counts:
    """A vector of nonnegative integer counts with its cached total."""

    values: tuple[int, ...]
    total: int = field(init=False)

    def __init__(self, values: Sequence[int]):
        vals = tuple(int(v) for v in values)
        if any(int(v) != v for v in values):
            raise DomainError(f"counts must be integers, got {tuple(values)!r}")
        if any(v < 0 for v in vals):
            raise DomainError(f"counts must be nonnegative, got {vals!r}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "total", sum(vals))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def check_dim(self, d: int, name: str = "counts") -> None:
        if len(self.values) != d:
            raise DomainError(f"{name} has length {len(self.values)}, expected d={d}")


def as_counts(x) -> Counts:
    return x if isinstance(x, Counts) else Counts(x)


@dataclass(frozen=True)
class PriorAlphaBeta:
    """Validated prior parameters; build through :func:`make_prior`.

    ``c`` is the exponent of the induced prior ``mu**(-c)`` on the total
    mean; propriety of every posterior is equivalent to ``c < 1``.
    """

    alpha: float
    beta: tuple[float, ...]
    beta_sum: float
    c: float
    name: str = "custom"

    @property
    def d(self) -> int:
        return len(self.beta)

    @property
    def kappa(self) -> float:
        """``sum(beta) - alpha`` (equal to ``1 - c``)."""
        return self.beta_sum - self.alpha

    @property
    def equal_beta(self) -> bool:
        return all(b == self.beta[0] for b in self.beta)

    def label(self) -> str:
        if self.name != "custom":
            return self.name
        return f"custom:{self.alpha!r}:" + ",".join(repr(b) for b in self.beta)


def make_prior(alpha: float, beta: Sequence[float], name: str = "custom") -> PriorAlphaBeta:
    """Validate ``(alpha, beta)`` and derive ``beta_sum`` and ``c``.

    Raises
    ------
    DomainError
        If some ``beta_i <= 0``.
    ProprietyError
        If ``sum(beta) - alpha <= 0``; the posterior at ``x = 0`` would
        then be improper.
    """
    beta = tuple(float(b) for b in beta)
    if not beta:
        raise DomainError("beta must have at least one component")
    if any(not b > 0 or not math.isfinite(b) for b in beta):
        raise DomainError(f"every beta_i must be a positive real, got {beta!r}")
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise DomainError(f"alpha must be finite, got {alpha!r}")
    beta_sum = math.fsum(beta)
    if not beta_sum - alpha > 0:
        raise ProprietyError(
            f"sum(beta) - alpha = {beta_sum - alpha!r} must be > 0 for a proper posterior"
        )
    return PriorAlphaBeta(alpha=alpha, beta=beta, beta_sum=beta_sum, c=alpha - beta_sum + 1.0, name=name)


def jeffreys(d: int) -> PriorAlphaBeta:
    """Jeffreys prior, ``prod lambda_i**(-1/2)``: alpha 0, every beta 1/2."""
    return make_prior(0.0, [0.5] * d, name="jeffreys")


def shrinkage_s(d: int) -> PriorAlphaBeta:
    """Shrinkage prior with ``alpha = d/2 - 1`` and every beta 1/2 (so ``c = 0``)."""
    return make_prior(d / 2.0 - 1.0, [0.5] * d, name="shrinkage")


def in_admissible_class(prior: PriorAlphaBeta) -> bool:
    """True iff ``0 < sum(beta) - alpha <= 1``."""
    return 0.0 < prior.kappa <= 1.0


@dataclass(frozen=True)
class MeanVector:
    """True Poisson means with total ``mu`` and direction ``weights``.

    ``weights`` is None when ``mu == 0``.
    """

    lambdas: tuple[float, ...]
    mu: float = field(init=False)
    weights: tuple[float, ...] | None = field(init=False)

    def __init__(self, lambdas: Sequence[float]):
        lam = tuple(float(v) for v in lambdas)
        if not lam:
            raise DomainError("mean vector must be nonempty")
        if any(not v >= 0 or not math.isfinite(v) for v in lam):
            raise DomainError(f"Poisson means must be finite and >= 0, got {lam!r}")
        mu = math.fsum(lam)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "weights", tuple(v / mu for v in lam) if mu > 0 else None)

    def __len__(self):
        return len(self.lambdas)


def log_marginal(prior: PriorAlphaBeta, a: float, x) -> float:
    """Log of the integral of prior times ``prod exp(-a lambda_i)(a lambda_i)**x_i``.

    Closed form::

        a**(alpha - sum beta) * Gamma(X - alpha + sum beta) / Gamma(X + sum beta)
            * prod_i Gamma(x_i + beta_i)

    with ``X = sum x``; evaluated entirely with log-gamma differences.
    """
    x = as_counts(x)
    x.check_dim(prior.d, "x")
    if not a > 0:
        raise DomainError(f"exposure a must be > 0, got {a!r}")
    total = x.total
    # log Gamma(X + kappa) - log Gamma(X + sum beta); note sum beta = kappa + alpha
    ratio = -log_gamma_ratio(total + prior.kappa, prior.alpha)
    per_coord = math.fsum(log_gamma(xi + bi) for xi, bi in zip(x.values, prior.beta))
    return -prior.kappa * math.log(a) + ratio + per_coord
