import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import quadrature_predictive_pmf
from poisson_predictive.errors import DomainError, GuardError
from poisson_predictive.model import ModelConfig, jeffreys, log_marginal, make_prior, shrinkage_s
from poisson_predictive.numerics import RngStream
from poisson_predictive.predictive import (
    PlugInSpec,
    PredictivePmfSpec,
    gb_estimate,
    log_mixed_pmf,
    log_plugin_pmf,
    log_predictive_pmf,
    log_total_predictive_pmf,
    predictive_table,
    sample_predictive,
)

GEOMETRIC = PredictivePmfSpec(make_prior(0.0, [1.0]), ModelConfig(1, 1.0, 1.0), [0])


def test_geometric_case():
    assert log_predictive_pmf(GEOMETRIC, [0]) == pytest.approx(math.log(0.5), abs=1e-15)
    assert log_predictive_pmf(GEOMETRIC, [1]) == pytest.approx(math.log(0.25), abs=1e-15)


def test_two_dim_against_quadrature_ratio():
    prior = make_prior(0.5, [0.5, 0.5])
    spec = PredictivePmfSpec(prior, ModelConfig(2, 1.0, 2.0), [1, 0])
    got = math.exp(log_predictive_pmf(spec, [0, 1]))
    assert got == pytest.approx(quadrature_predictive_pmf(prior, 1.0, 2.0, (1, 0), (0, 1)), rel=1e-6)


@pytest.mark.parametrize("x,y", [((0, 0), (0, 0)), ((2, 1), (1, 3)), ((0, 3), (2, 0))])
def test_equals_marginal_ratio(x, y):
    prior = make_prior(0.3, [0.5, 1.25])
    a, b = 1.5, 0.7
    spec = PredictivePmfSpec(prior, ModelConfig(2, a, b), x)
    xy = [xi + yi for xi, yi in zip(x, y)]
    X, Y = sum(x), sum(y)
    # the Poisson kernels in the marginals are (a lam)^x e^{-a lam}; undo their x! and powers
    route = (
        log_marginal(prior, a + b, xy) - log_marginal(prior, a, x)
        + Y * math.log(b) - sum(math.lgamma(yi + 1) for yi in y)
        - (X + Y) * math.log(a + b) + X * math.log(a)
    )
    assert log_predictive_pmf(spec, y) == pytest.approx(route, abs=1e-10)


@pytest.mark.parametrize(
    "c,a,b,X,Y,want",
    [
        (0.0, 1.0, 1.0, 0, 3, -4 * math.log(2)),
        (-0.5, 1.0, 1.0, 0, 0, -1.5 * math.log(2)),
        (0.0, 1.0, 1.0, 2, 1, math.log(3 / 16)),
    ],
)
def test_total_pmf_closed_forms(c, a, b, X, Y, want):
    assert log_total_predictive_pmf(c, a, b, X, Y) == pytest.approx(want, abs=1e-14)


def test_total_pmf_rejects_c_at_least_one():
    with pytest.raises(DomainError):
        log_total_predictive_pmf(1.0, 1.0, 1.0, 0, 0)


@pytest.mark.parametrize("prior_fn,d,x", [(shrinkage_s, 3, (2, 0, 1)), (jeffreys, 2, (1, 4)), (jeffreys, 3, (0, 0, 0))])
def test_marginalization_to_totals(prior_fn, d, x):
    prior = prior_fn(d)
    spec = PredictivePmfSpec(prior, ModelConfig(d, 1.3, 0.8), x)
    for Y in range(6):
        mass = math.fsum(
            math.exp(log_predictive_pmf(spec, y))
            for y in itertools.product(range(Y + 1), repeat=d) if sum(y) == Y
        )
        assert mass == pytest.approx(math.exp(log_total_predictive_pmf(prior.c, 1.3, 0.8, sum(x), Y)), abs=1e-10)


def test_table_geometric_and_coverage():
    rows = predictive_table(GEOMETRIC, 0.75)
    assert [(y.values, p) for y, p in rows] == [((0,), 0.5), ((1,), 0.25)]
    spec = PredictivePmfSpec(shrinkage_s(2), ModelConfig(2), [0, 0])
    rows = predictive_table(spec, 0.99)
    assert math.fsum(p for _, p in rows) >= 0.99 - 1e-15
    for y, p in rows[:20]:
        assert p == pytest.approx(math.exp(log_predictive_pmf(spec, y)), rel=1e-14)
    totals = [y.total for y, _ in rows]
    assert totals == sorted(totals)


def test_table_lexicographic_within_total():
    spec = PredictivePmfSpec(shrinkage_s(3), ModelConfig(3), [1, 1, 1])
    rows = predictive_table(spec, 0.5)
    by_total = {}
    for y, _ in rows:
        by_total.setdefault(y.total, []).append(y.values)
    for ys in by_total.values():
        assert ys == sorted(ys)


def test_table_guard_and_coverage_bounds():
    spec = PredictivePmfSpec(shrinkage_s(12), ModelConfig(12, 1.0, 50.0), [30] * 12)
    with pytest.raises(GuardError):
        predictive_table(spec, 0.999)
    with pytest.raises(DomainError):
        predictive_table(GEOMETRIC, 1.0)
    with pytest.raises(DomainError):
        predictive_table(GEOMETRIC, 0.0)


def test_sampler_zero_frequency_and_determinism():
    spec = PredictivePmfSpec(shrinkage_s(3), ModelConfig(3), [2, 0, 1])
    draws = sample_predictive(spec, 100_000, RngStream(21))
    p0 = math.exp(log_predictive_pmf(spec, [0, 0, 0]))
    freq = sum(1 for y in draws if y.total == 0) / len(draws)
    assert abs(freq - p0) <= 4 * math.sqrt(p0 * (1 - p0) / len(draws))
    again = sample_predictive(spec, 100_000, RngStream(21))
    assert draws == again
    assert sample_predictive(spec, 0, RngStream(1)) == []


def test_sampler_chi_square_on_totals():
    from scipy import stats

    spec = PredictivePmfSpec(jeffreys(2), ModelConfig(2, 1.0, 2.0), [3, 1])
    draws = sample_predictive(spec, 50_000, RngStream(5))
    counts = Counter(min(y.total, 15) for y in draws)
    probs = [math.exp(log_total_predictive_pmf(jeffreys(2).c, 1.0, 2.0, 4, k)) for k in range(15)]
    probs.append(1 - math.fsum(probs))
    obs = [counts.get(k, 0) for k in range(16)]
    assert stats.chisquare(obs, np.array(probs) * len(draws)).pvalue > 1e-4


@pytest.mark.parametrize(
    "x,a,want",
    [((0, 0, 0), 1.0, (1 / 3, 1 / 3, 1 / 3)), ((2, 0, 1), 1.0, (20 / 9, 4 / 9, 12 / 9)), ((2, 0, 1), 2.0, (10 / 9, 2 / 9, 6 / 9))],
)
def test_gb_estimate(x, a, want):
    assert gb_estimate(x, a, 3) == pytest.approx(want, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=8), st.floats(0.1, 10.0))
def test_gb_estimate_positive_and_sums(x, a):
    est = gb_estimate(x, a, len(x))
    assert all(v > 0 for v in est)
    assert math.fsum(est) == pytest.approx((sum(x) + 1) / a, rel=1e-13)


def test_plugin_pmf():
    assert log_plugin_pmf(PlugInSpec((1.0,), 1.0), [0]) == pytest.approx(-1.0)
    assert log_plugin_pmf(PlugInSpec((0.0,), 1.0), [1]) == -math.inf
    assert log_plugin_pmf(PlugInSpec((1.0, 2.0), 1.0), [1, 0]) == pytest.approx(-3.0)
    assert PlugInSpec((0.0, 1.0), 1.0).has_zero_mean
    with pytest.raises(DomainError):
        PlugInSpec((-1.0,), 1.0)


def test_mixed_pmf_values_and_normalization():
    m = ModelConfig(2)
    assert log_mixed_pmf([0, 0], [0, 0], m) == pytest.approx(math.log(0.5))
    assert log_mixed_pmf([0, 0], [1, 0], m) == pytest.approx(math.log(1 / 8))
    m3 = ModelConfig(3, 1.0, 2.0)
    total = math.fsum(
        math.exp(log_mixed_pmf([1, 0, 0], y, m3))
        for y in itertools.product(range(41), repeat=3) if sum(y) <= 40
    )
    # with b = 2 the totals law leaves ~9e-7 above 40; that tail is known exactly
    tail = 1 - math.fsum(math.exp(log_total_predictive_pmf(0.0, 1.0, 2.0, 1, k)) for k in range(41))
    assert tail > 0
    assert total + tail == pytest.approx(1.0, abs=1e-12)
