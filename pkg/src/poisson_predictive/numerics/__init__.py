"""Numerical foundation: special functions, Poisson series, quadrature, sampling."""
from .poisson import (
    log_poisson_pmf,
    poisson_expectation,
    poisson_quantile_window,
    poisson_weights,
    truncation_point,
)
from .quadrature import gauss_legendre, integrate
from .rng import RngStream, sample_dirichlet, sample_gamma, sample_poisson
from .special import log_factorial, log_gamma, log_gamma_ratio, regularized_lower_gamma
from .tolerance import DEFAULT_TOLERANCE, Tolerance

__all__ = [
    "DEFAULT_TOLERANCE",
    "RngStream",
    "Tolerance",
    "gauss_legendre",
    "integrate",
    "log_factorial",
    "log_gamma",
    "log_gamma_ratio",
    "log_poisson_pmf",
    "poisson_expectation",
    "poisson_quantile_window",
    "poisson_weights",
    "regularized_lower_gamma",
    "sample_dirichlet",
    "sample_gamma",
    "sample_poisson",
    "truncation_point",
]
