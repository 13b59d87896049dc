import math

import pytest
from scipy import integrate as sci_integrate

from poisson_predictive.blyth import (
    BlythConfig,
    bayes_risk_gap,
    gap_terms,
    gap_upper_bound,
    h_l,
    mu_hat,
    mu_hat_posterior_mean,
    weighted_moment,
)
from poisson_predictive.errors import DomainError
from poisson_predictive.numerics import regularized_lower_gamma


def test_config_validation():
    for bad in [dict(l=1.0), dict(l=10, c=1.0), dict(l=10, c=-0.1), dict(l=10, a=0.0)]:
        with pytest.raises(DomainError):
            BlythConfig(**bad)


@pytest.mark.parametrize("mu,want", [(0.0, 1.0), (1.0, 1.0), (math.sqrt(10), 0.5), (10.0, 0.0), (50.0, 0.0)])
def test_h_l(mu, want):
    assert h_l(mu, 10) == pytest.approx(want, abs=1e-15)


def _g(mu, l):
    return 0.5 * h_l(mu, l) ** 2


def _direct_moment(z, t, shift, cfg, upper):
    f = lambda m: math.exp(-t * m) * (t * m) ** (z - cfg.c + shift) * _g(m, cfg.l)  # noqa: E731
    cuts = sorted({0.0, 1.0, min(cfg.l, upper), upper})
    return math.fsum(
        sci_integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=500)[0] for lo, hi in zip(cuts, cuts[1:])
    )


def test_weighted_moment_against_global_quadrature():
    cfg = BlythConfig(1e6, 0.0)
    assert weighted_moment(0, 1.0, 0, cfg) == pytest.approx(_direct_moment(0, 1.0, 0, cfg, 60.0), rel=1e-9)
    cfg = BlythConfig(10, 0.5)
    for z, t, s in [(0, 1.0, 0), (3, 1.5, 1), (7, 2.0, 0)]:
        assert weighted_moment(z, t, s, cfg) == pytest.approx(_direct_moment(z, t, s, cfg, 200.0), rel=1e-9)


def test_weighted_moment_bounds_and_large_t():
    cfg = BlythConfig(10, 0.0)
    assert weighted_moment(0, 1.0, 0, cfg) < 0.5
    cfg = BlythConfig(10, 0.5)
    t = 50.0
    closed = math.gamma(0.5) * regularized_lower_gamma(0.5, t) / (2 * t)
    assert weighted_moment(0, t, 0, cfg) == pytest.approx(closed, abs=1e-10)


def test_mu_hat_routes_agree_and_bound():
    cfg = BlythConfig(10, 0.5)
    raw = _direct_moment(2, 1.0, 1, cfg, 200.0) / (1.0 * _direct_moment(2, 1.0, 0, cfg, 200.0))
    assert mu_hat(2, 1.0, cfg) == pytest.approx(raw, rel=1e-6)
    for l in (10, 1e3):
        for c in (0.0, 0.5, 0.9):
            cfg = BlythConfig(l, c)
            for z in (0, 1, 5, 30):
                for t in (0.5, 1.0, 2.0):
                    m1, m2 = mu_hat(z, t, cfg), mu_hat_posterior_mean(z, t, cfg)
                    assert m1 == pytest.approx(m2, rel=1e-6)
                    assert 0 < m1 <= (z + 1 - c) / t


def test_mu_hat_approaches_unshrunk_value_like_inverse_log():
    # 1 - mu_hat decays like const/log(l), so the approach is slow but steady
    gaps = [1 - mu_hat(0, 1.0, BlythConfig(l, 0.0)) for l in (1e2, 1e4, 1e6, 1e8, 1e12)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    scaled = [g * math.log(l) for g, l in zip(gaps, (1e2, 1e4, 1e6, 1e8, 1e12))]
    assert scaled[-1] == pytest.approx(scaled[-2], rel=0.02)
    assert gaps[2] < 0.06


def test_gap_terms_match_literal_double_integral():
    cfg = BlythConfig(10, 0.5)
    t = 1.3
    terms = gap_terms(t, cfg)
    for z in (0, 3, 10):
        s = z + 1 - cfg.c
        mh = mu_hat(z, t, cfg)

        def f(m):
            pois = math.exp(-t * m + z * math.log(t * m) - math.lgamma(z + 1))
            return _g(m, cfg.l) * m ** (-cfg.c) * pois * (s / t - mh - m * math.log(s / (t * mh)))

        want = sci_integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-12)[0] + sci_integrate.quad(f, 1, 10, epsabs=0, epsrel=1e-12)[0]
        assert terms[z] == pytest.approx(want, rel=1e-8)
        assert terms[z] >= 0


def test_gap_against_nested_quadrature():
    cfg = BlythConfig(10, 0.0)

    def integrand(t):
        return math.fsum(gap_terms(t, cfg, zmax=120).tolist())

    want = sci_integrate.quad(integrand, 1.0, 2.0, epsabs=0, epsrel=1e-11)[0]
    assert bayes_risk_gap(cfg) == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize(
    "c,l,a,b,want",
    [(0.0, math.e, 1.0, 1.0, 1.0), (0.5, math.e**2, 1.0, 1.0, 1.0), (0.0, 1e6, 1.0, 1.0, 1 / math.log(1e6))],
)
def test_gap_upper_bound(c, l, a, b, want):
    assert gap_upper_bound(BlythConfig(l, c, a, b)) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("ab", [(1.0, 1.0), (1.0, 3.0)])
@pytest.mark.parametrize("c", [0.0, 0.5, 0.9])
def test_gap_below_bound_and_decreasing(c, ab):
    gaps = []
    for l in (10, 1e2, 1e3):
        cfg = BlythConfig(l, c, *ab)
        g = bayes_risk_gap(cfg)
        assert 0 <= g <= gap_upper_bound(cfg)
        gaps.append(g)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
