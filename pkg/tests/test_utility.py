import numpy as np
import pytest

from isp_qos.errors import DomainError
from isp_qos.limiter import LimiterParams, limiter
from isp_qos.market import OfferedPlan
from isp_qos.utility import (
    PrimaryContract,
    mean_primary_utility,
    primary_participation_bound,
    primary_utility,
)
from oracles import simpson


def test_full_allocation_no_shortfall():
    c = PrimaryContract(purchased_rate=0.6, theta=1.0, price_p=0.2, lambda_penalty=1.0)
    u = primary_utility(c, 0.6, 0.45)
    assert u.total == pytest.approx(0.6 * (1 - 0.2))
    assert u.compensation == 0


def test_hand_evaluated_utility():
    c = PrimaryContract(purchased_rate=0.6, theta=0.5, price_p=0.2, lambda_penalty=1.0)
    u = primary_utility(c, 0.4, 0.5)
    assert u.service_value == pytest.approx(0.2)
    assert u.payment == pytest.approx(0.12)
    assert u.compensation == pytest.approx(0.1)
    assert u.total == pytest.approx(0.18)


def test_breakdown_identity():
    rng = np.random.default_rng(1)
    for _ in range(100):
        c = PrimaryContract(rng.uniform(0.1, 1), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 3))
        u = primary_utility(c, rng.uniform(0, c.purchased_rate), rng.uniform(0, c.purchased_rate))
        assert u.total == u.service_value - u.payment + u.compensation


def test_participation_bound_examples():
    assert primary_participation_bound(0.0, 0.3) == 0
    assert primary_participation_bound(0.2, 0.2) == 1
    with pytest.raises(DomainError):
        primary_participation_bound(0.1, 0.0)


def test_participation_bound_keeps_utility_non_negative():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        r_min = rng.uniform(0.05, 0.5)
        r_p = rng.uniform(r_min + 1e-3, 1.0)
        p_p = rng.uniform(0, r_min)
        theta = primary_participation_bound(p_p, r_min)
        g = limiter(LimiterParams(rng.uniform(0.05, 1), r_min, r_p), rng.uniform(0, 1))
        c = PrimaryContract(r_p, theta, p_p, lambda_penalty=0.0)
        assert primary_utility(c, g, rng.uniform(0, r_p)).total >= -1e-15


def test_thresholds_share_price_over_quality_form():
    # both services admit types at or above price / guaranteed quality
    for p, q in [(0.1, 0.4), (0.25, 0.5), (0.3, 0.9)]:
        assert primary_participation_bound(p, q) == pytest.approx(OfferedPlan(p, q).ratio)


def test_mean_utility_against_quadrature():
    rng = np.random.default_rng(2)
    for _ in range(50):
        r_min = rng.uniform(0.1, 0.5)
        p_p = rng.uniform(0, 0.95 * r_min)
        r_p = rng.uniform(r_min + 0.01, 1)
        lam = rng.uniform(0, 2)
        g = rng.uniform(r_min, r_p)
        d = rng.uniform(0, r_p)
        short = max(0.0, d - g)
        quad = simpson(lambda th: th * g - r_p * p_p + lam * short, p_p / r_min, 1.0)
        val, ok = mean_primary_utility(p_p, r_min, r_p, lam, g, d)
        assert ok
        assert val == pytest.approx(quad, abs=1e-10)


def test_mean_utility_special_cases():
    val, _ = mean_primary_utility(0.0, 0.2, 0.6, 1.5, 0.3, 0.5)
    assert val == pytest.approx(0.5 * 0.3 + 1.5 * 0.2)
    val, _ = mean_primary_utility(0.05, 0.2, 0.6, 1.5, 0.4, 0.4)
    lo = 0.25
    assert val == pytest.approx(0.5 * (1 - lo**2) * 0.4 - 0.6 * 0.05 * (1 - lo))
    assert mean_primary_utility(0.3, 0.2, 0.6, 1.0, 0.4, 0.3) == (0.0, False)


def test_mean_utility_non_decreasing_without_shortfall():
    vals = [mean_primary_utility(0.05, 0.2, 0.6, 1.0, g, 0.2)[0] for g in np.linspace(0.2, 0.6, 50)]
    assert np.all(np.diff(vals) >= 0)


def test_contract_validation():
    for kw in (dict(theta=1.2), dict(purchased_rate=0), dict(price_p=-0.1), dict(lambda_penalty=-1)):
        with pytest.raises(DomainError):
            PrimaryContract(**(dict(purchased_rate=0.6) | kw))
