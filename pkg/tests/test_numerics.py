import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate
from scipy import stats

from poisson_predictive.errors import DomainError, EvaluationError, IntegrationError
from poisson_predictive.numerics import (
    DEFAULT_TOLERANCE,
    Tolerance,
    gauss_legendre,
    integrate,
    log_poisson_pmf,
    poisson_expectation,
    poisson_quantile_window,
    poisson_weights,
    truncation_point,
)


def test_tolerance_validation():
    assert DEFAULT_TOLERANCE.tail_mass == 1e-12
    with pytest.raises(DomainError):
        Tolerance(abs_tol=0.0)
    with pytest.raises(DomainError):
        Tolerance(tail_mass=-1.0)
    assert Tolerance().as_dict() == {"abs_tol": 1e-10, "rel_tol": 1e-10, "tail_mass": 1e-12}


@pytest.mark.parametrize("k,m", [(0, 1.0), (3, 2.5), (50, 48.0), (1000, 1100.0), (0, 1e-9), (200, 3.0)])
def test_log_poisson_pmf_matches_scipy(k, m):
    assert log_poisson_pmf(k, m) == pytest.approx(stats.poisson.logpmf(k, m), rel=1e-12)


def test_log_poisson_pmf_degenerate_rate():
    assert log_poisson_pmf(0, 0.0) == 0.0
    assert log_poisson_pmf(1, 0.0) == -math.inf


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e4), st.sampled_from([1e-6, 1e-9, 1e-12, 1e-15]))
def test_truncation_point_certifies_tail(m, tail):
    k = truncation_point(m, tail)
    assert stats.poisson.sf(k, m) <= tail


def test_quantile_window_is_tight():
    m, tail = 5.0, 1e-10
    k = poisson_quantile_window(m, tail)
    assert stats.poisson.sf(k, m) <= tail
    assert stats.poisson.sf(k - 1, m) > tail
    assert k <= truncation_point(m, tail)


@pytest.mark.parametrize("m", [1e-6, 0.3, 7.0, 250.0, 1e4])
def test_poisson_weights_sum_to_one(m):
    k = truncation_point(m, 1e-15)
    w = poisson_weights(m, k)
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-14)
    # mpmath as oracle; scipy's pmf drifts by ~1e-11 relative at large rates
    for j in sorted({0, k // 3, int(m), k // 2, k}):
        with mpmath.workdps(40):
            exact = float(mpmath.exp(-m + j * mpmath.log(m) - mpmath.loggamma(j + 1)))
        assert w[j] == pytest.approx(exact, rel=1e-13, abs=1e-300)


def test_poisson_expectation_log_shift():
    # E[log(X + 1)] at rate 1 by a long direct sum
    direct = math.fsum(math.exp(-1.0 - math.lgamma(k + 1)) * math.log(k + 1) for k in range(80))
    got = poisson_expectation(lambda k: math.log(k + 1), 1.0)
    assert got == pytest.approx(direct, abs=1e-13)
    assert got == pytest.approx(0.5734028091, abs=1e-10)


def test_poisson_expectation_moments():
    m = 12.5
    assert poisson_expectation(lambda k: k, m) == pytest.approx(m, rel=1e-13)
    var = poisson_expectation(lambda k: (k - m) ** 2, m)
    assert var == pytest.approx(m, rel=1e-12)


def test_poisson_expectation_zero_rate_and_errors():
    assert poisson_expectation(lambda k: k + 3.0, 0.0) == 3.0
    with pytest.raises(EvaluationError):
        poisson_expectation(lambda k: math.inf if k == 2 else 0.0, 1.0)
    with pytest.raises(DomainError):
        poisson_expectation(lambda k: k, -1.0)


@pytest.mark.parametrize(
    "f,lo,hi",
    [
        (math.sin, 0.0, math.pi),
        (lambda x: math.exp(-x * x), -3.0, 5.0),
        (lambda x: math.sqrt(x), 0.0, 1.0),
        (lambda x: 1.0 / (1e-3 + x * x), -1.0, 1.0),
        (lambda x: math.log(x), 1e-9, 2.0),
    ],
)
def test_integrate_matches_scipy(f, lo, hi):
    want = sci_integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=500)[0]
    assert integrate(f, lo, hi) == pytest.approx(want, rel=1e-9, abs=1e-10)


def test_integrate_vectorized_and_breakpoints():
    f = lambda x: np.abs(x - 0.3)  # noqa: E731
    got = integrate(f, 0.0, 1.0, points=(0.3,), vectorized=True)
    assert got == pytest.approx(0.5 * (0.3**2 + 0.7**2), abs=1e-14)


def test_integrate_reports_failure():
    with pytest.raises(IntegrationError) as info:
        integrate(lambda x: math.sin(1.0 / x) / x, 1e-12, 1.0, Tolerance(abs_tol=1e-14, rel_tol=1e-14))
    assert math.isfinite(info.value.estimate) or math.isnan(info.value.estimate)
    with pytest.raises(DomainError):
        integrate(math.sin, 1.0, 0.0)


def test_gauss_legendre_integrates_polynomials_exactly():
    x, w = gauss_legendre(8)
    assert np.sum(w * x**14) == pytest.approx(2.0 / 15.0, rel=1e-14)
