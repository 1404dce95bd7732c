import math
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruinlab.errors import DomainError
from ruinlab.model import (
    GBM,
    ConstantPremium,
    ExpLevy,
    Exponential,
    HyperbolicPoint,
    LogNormal,
    Pareto,
    PremiumFunction,
    Regime,
    RiskParams,
    certain_ruin_regime,
    deterministic_interest,
    diffusion_limit_ruin,
    gbm_exponent,
    has_unbounded_support,
    hyperbolic_mul,
    premium_from_loading,
    safety_loading,
    sinusoidal_premium,
)
from ruinlab.processes import LevyJumpSpec, NormalJump


def test_safety_loading_examples():
    assert safety_loading(11, 10, 1) == pytest.approx(0.1, rel=1e-12)
    assert safety_loading(5.0, 5.0, 1.0) == 0.0
    assert safety_loading(2 * 3 * 0.7, 3, 0.7) == pytest.approx(1.0, rel=1e-12)


def test_safety_loading_rejects_nonpositive_rate():
    with pytest.raises(DomainError):
        safety_loading(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        safety_loading(1.0, 1.0, -1.0)


@given(st.floats(0, 10), st.floats(0.01, 100), st.floats(0.01, 100))
def test_loading_roundtrip(rho, lam, mu):
    c = premium_from_loading(rho, lam, mu)
    assert safety_loading(c, lam, mu) == pytest.approx(rho, abs=1e-12 * (1 + rho))


def test_diffusion_limit_examples():
    assert diffusion_limit_ruin(0.0, 1.3, 2.0, 7.0) == 1.0
    assert diffusion_limit_ruin(0.4, 1.3, 2.0, 0.0) == 1.0
    assert diffusion_limit_ruin(0.1, 1, 2, 10) == pytest.approx(math.exp(-1), rel=1e-15)


def test_diffusion_limit_domain():
    with pytest.raises(DomainError):
        diffusion_limit_ruin(0.1, 1, 0.0, 1)
    with pytest.raises(DomainError):
        diffusion_limit_ruin(-0.1, 1, 2, 1)


def test_diffusion_limit_strictly_decreasing():
    us = np.linspace(0, 50, 51)
    vals = [diffusion_limit_ruin(0.1, 1, 2, u) for u in us]
    assert np.all(np.diff(vals) < 0)
    rhos = np.linspace(0, 2, 41)
    vals = [diffusion_limit_ruin(r, 1, 2, 5) for r in rhos]
    assert np.all(np.diff(vals) < 0)


def test_gbm_exponent_examples():
    assert gbm_exponent(0.03, 0.2) == pytest.approx(0.01)
    assert GBM(0.03, 0.2).regime() is Regime.UNCERTAIN
    assert gbm_exponent(0.01, 0.2) == pytest.approx(-0.01)
    assert GBM(0.01, 0.2).regime() is Regime.CERTAIN
    assert GBM(0.02, 0.2).regime() is Regime.BOUNDARY


def test_regime_matches_exponent_sign_on_grid():
    for a in np.linspace(-0.05, 0.05, 21):
        for s in np.linspace(0.05, 0.5, 10):
            alpha = gbm_exponent(a, s)
            if abs(2 * a - s * s) < 1e-9:
                continue
            expected = Regime.CERTAIN if alpha < 0 else Regime.UNCERTAIN
            assert certain_ruin_regime(GBM(a, s)) is expected
            assert (2 * a / s**2 < 1) == (alpha < 0)


@pytest.mark.parametrize("s", ["0.1", "0.2", "0.3", "0.45"])
def test_decimal_boundary_is_boundary(s):
    sigma = float(s)
    a = float(Decimal(s) ** 2 / 2)
    assert GBM(a, sigma).regime() is Regime.BOUNDARY


def test_deterministic_interest_is_gbm_with_zero_sigma():
    assert deterministic_interest(0.03) == GBM(0.03, 0.0)
    assert deterministic_interest(-0.1).regime() is Regime.CERTAIN


def test_levy_regime_uses_alpha():
    jumps = LevyJumpSpec(1.0, NormalJump(0.0, 0.3))
    assert ExpLevy(0.2, -0.01, jumps).regime() is Regime.CERTAIN
    assert ExpLevy(0.2, 0.01, jumps).regime() is Regime.UNCERTAIN


def test_group_law_examples():
    p = HyperbolicPoint(1.0, 2.0)
    assert hyperbolic_mul(p, HyperbolicPoint(3.0, 4.0)) == HyperbolicPoint(7.0, 8.0)
    assert p * HyperbolicPoint.identity() == p
    q = p * p.inverse()
    assert q.x == pytest.approx(0.0, abs=1e-15) and q.y == pytest.approx(1.0)


def test_group_law_rejects_nonpositive_y():
    with pytest.raises(DomainError):
        HyperbolicPoint(0.0, 0.0)


def test_group_law_vectorised_associativity():
    rng = np.random.default_rng(5)
    n = 10_000
    pts = [HyperbolicPoint(rng.normal(size=n), rng.lognormal(size=n)) for _ in range(3)]
    a, b, c = pts
    left, right = (a * b) * c, a * (b * c)
    np.testing.assert_allclose(left.x, right.x, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(left.y, right.y, rtol=1e-12)
    e = HyperbolicPoint.identity()
    assert np.array_equal((e * a).x, a.x) and np.array_equal((a * e).y, a.y)


@settings(max_examples=200)
@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.1, 5))
def test_inverse_two_sided(x1, y1, x2, y2):
    p = HyperbolicPoint(x1, y1)
    for q in (p * p.inverse(), p.inverse() * p):
        assert q.x == pytest.approx(0.0, abs=1e-12) and q.y == pytest.approx(1.0, rel=1e-12)
    r = HyperbolicPoint(x2, y2)
    assert (p * r).inverse().x == pytest.approx((r.inverse() * p.inverse()).x, abs=1e-9)


LAWS = [Exponential(1.5), Pareto(3.5, 2.0), LogNormal(-0.5, 0.8)]


@pytest.mark.parametrize("law", LAWS, ids=lambda l: type(l).__name__)
def test_law_moments_match_samples(law):
    y = law.sample(np.random.default_rng(11), 1_000_000)
    n = y.size
    assert abs(y.mean() - law.mean()) < 5 * y.std() / math.sqrt(n)
    y2 = y * y
    assert abs(y2.mean() - law.second_moment()) < 5 * y2.std() / math.sqrt(n)
    assert law.second_moment() >= law.mean() ** 2


def test_law_analytic_moments():
    assert Exponential(2.0).second_moment() == pytest.approx(8.0, rel=1e-12)
    p = Pareto(3.0, 2.0)
    assert p.mean() == pytest.approx(1.0, rel=1e-12)
    assert p.second_moment() == pytest.approx(2 * 4 / (2 * 1), rel=1e-12)
    ln = LogNormal(-0.5, 1.0)
    assert ln.mean() == pytest.approx(1.0, rel=1e-12)
    assert ln.second_moment() == pytest.approx(math.exp(1.0), rel=1e-12)


def test_pareto_heavy_moments_infinite():
    assert math.isinf(Pareto(2.0, 1.0).second_moment())
    assert math.isinf(Pareto(1.0, 1.0).mean())


@pytest.mark.parametrize("law", LAWS, ids=lambda l: type(l).__name__)
def test_unbounded_support(law):
    assert has_unbounded_support(law)
    assert np.all(law.survival(np.array([1e-3, 1.0, 10.0])) > 0)


def test_bounded_support_detected():
    class Capped:
        def mean(self):
            return 0.5

        def survival(self, y):
            return np.where(y < 1.0, 1.0 - y, 0.0)

    assert not has_unbounded_support(Capped())


def test_law_validation():
    with pytest.raises(DomainError):
        Exponential(0.0)
    with pytest.raises(DomainError):
        Pareto(-1.0, 1.0)
    with pytest.raises(DomainError):
        LogNormal(0.0, 0.0)


def test_risk_params_validation_and_premium_coercion():
    p = RiskParams(10, 1.1, 1.0, Exponential(1.0))
    assert isinstance(p.premium, ConstantPremium) and p.premium.c == 1.1
    assert p.loading() == pytest.approx(0.1)
    with pytest.raises(DomainError):
        RiskParams(-1, 1.1, 1.0, Exponential(1.0))
    with pytest.raises(DomainError):
        RiskParams(1, 1.1, 0.0, Exponential(1.0))


def test_premium_function_bounds():
    prem = sinusoidal_premium(1.1, 0.5, 1.0)
    assert prem.bound() == pytest.approx(1.65)
    t = np.linspace(0, 100, 1001)
    assert np.all(prem.rate(t) <= 1.65 + 1e-12) and np.all(prem.rate(t) >= 0)
    with pytest.raises(DomainError):
        PremiumFunction(lambda s: 2.0 + 0 * s, 1.0)
    with pytest.raises(DomainError):
        sinusoidal_premium(1.0, 1.5)
