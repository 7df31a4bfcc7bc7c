import io
import math
from dataclasses import replace

import numpy as np
import pytest

from isp_qos import config as cfg
from isp_qos.errors import ConfigError, DomainError
from isp_qos.limiter import LimiterParams, limiter
from isp_qos.market import IspConfig, OfferedPlan
from isp_qos.sim import (
    LEDGER_HEADER,
    PrimaryUser,
    Scenario,
    beta_sweep,
    qos_uplift,
    run,
    secondary_uplift,
    simulate_user,
    write_ledger_csv,
    write_summary,
)
from isp_qos.traffic import TrafficSpec, TrafficTrace, zero_trace
from isp_qos.utility import PrimaryContract

N = 2000


def scenario(n=N, seed=0, **isp_kw) -> Scenario:
    cp = cfg.load(None, seed)
    cp["scenario"]["n_slots"] = str(n)
    for k, v in isp_kw.items():
        cp["isp"][k] = str(v)
    return cfg.scenario(cp)


@pytest.fixture(scope="module")
def base_run():
    sc = scenario()
    return sc, *run(sc)


def test_zero_demand():
    sc = scenario()
    user = sc.primary_users[0]
    sc = replace(sc, primary_users=(replace(user, trace=zero_trace(user.traffic)),))
    records, summary = run(sc)
    assert summary.shortfall_fraction == 0
    assert summary.total_penalty == 0
    t = sc.isp.window_t
    assert all(r.allocated == pytest.approx(sc.isp.r_min) for r in records[t:])


def test_warm_up_allocates_purchased_rate(base_run):
    sc, records, _ = base_run
    for r in records[: sc.isp.window_t]:
        assert r.alpha == 1.0 and r.allocated == 0.6


def test_ledger_invariants(base_run):
    sc, records, summary = base_run
    r_min, r_p = sc.isp.r_min, 0.6
    for r in records:
        assert r.allocated == limiter(LimiterParams(r.gamma, r_min, r_p), r.alpha)
        assert r.shortfall == max(0.0, r.demand - r.allocated)
        assert r.penalty == sc.isp.lambda_penalty * r.shortfall
        u = r.utility
        assert u.total == u.service_value - u.payment + u.compensation
    alloc = np.array([r.allocated for r in records])
    assert summary.saved_bandwidth == pytest.approx(np.mean(r_p - alloc), abs=1e-15)
    assert summary.saved_bandwidth >= 0
    assert summary.total_penalty == pytest.approx(sc.isp.lambda_penalty * sum(r.shortfall for r in records))
    assert 0 <= summary.shortfall_fraction <= 1


def test_saves_bandwidth(base_run):
    _, _, summary = base_run
    assert summary.mean_allocated < 0.6
    assert summary.shortfall_fraction < 0.15
    assert summary.secondary_qos_uplift > 0


def test_causality(base_run):
    sc, records, _ = base_run
    demand = np.array([r.demand for r in records])
    for k in (5, 10, 11, 500, 1777):
        bumped = demand.copy()
        bumped[k] = 0.6 - bumped[k]
        replay, _ = simulate_user(sc, 0, bumped)
        for j in range(k + 1):
            assert replay[j].allocated == records[j].allocated


def test_reproducible():
    a, sa = run(scenario(seed=4))
    b, sb = run(scenario(seed=4))
    assert [r.csv_row() for r in a] == [r.csv_row() for r in b]
    assert sa == sb


def test_identical_users_identical_ledgers():
    sc = scenario()
    u = sc.primary_users[0]
    records, summary = run(replace(sc, primary_users=(u, u)))
    first = [r for r in records if r.user == 0]
    second = [r for r in records if r.user == 1]
    assert [replace(r, user=1) for r in first] == second
    assert summary.capacity_violations == sum(
        1 for a, b in zip(first, second) if a.allocated + b.allocated > 1.0
    )


def test_validation_errors():
    sc = scenario()
    u = sc.primary_users[0]
    with pytest.raises(ConfigError):
        run(replace(sc, primary_users=()))
    with pytest.raises(ConfigError):
        run(replace(sc, n_slots=N + 1))
    short = replace(u, trace=TrafficTrace(np.zeros(5), u.traffic))
    with pytest.raises(ConfigError):
        run(replace(sc, primary_users=(short,)))
    low = replace(u, contract=replace(u.contract, purchased_rate=0.3),
                  traffic=replace(u.traffic, purchased_rate=0.3))
    with pytest.raises(ConfigError):
        run(replace(sc, primary_users=(low,)))


def test_qos_uplift_examples():
    assert qos_uplift(0.5, 1.0, 0.0) == 0
    assert qos_uplift(0.5, 1.0, 1.0) == pytest.approx(0.25)
    assert qos_uplift(0.5, 1.0, 1e12) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        qos_uplift(0.5, 0.0, 1.0)


def test_secondary_uplift_through_split():
    # c = 2 and E solving 3E^2 + E - 1 = 0 put x = 1/2, so c_p = c_s = 1
    e = (math.sqrt(13) - 1) / 6
    isp = IspConfig(2.0, OfferedPlan(e, 1.0), r_min=0.2)
    assert secondary_uplift(isp, 0.0, 0.5) == 0
    assert secondary_uplift(isp, 1.0, 0.5) == pytest.approx(0.25)
    assert secondary_uplift(isp, 1e12, 0.5) == pytest.approx(0.5)


def test_ledger_csv_window(base_run):
    _, records, summary = base_run
    buf = io.StringIO()
    n = write_ledger_csv(records, buf, (100, 200))
    lines = buf.getvalue().splitlines()
    assert n == 101 and len(lines) == 102
    assert lines[0] == ",".join(LEDGER_HEADER)
    buf = io.StringIO()
    write_summary(summary, buf)
    text = buf.getvalue()
    assert "# shortfall_fraction = " in text
    assert text.splitlines()[-2].startswith("mean_allocated,")


def test_beta_sweep_shape_and_determinism():
    sc = scenario(n=1500)
    one = beta_sweep(sc, [2.0], [0])
    assert len(one) == 1 and one[0][0] == 2.0
    a = beta_sweep(sc, [1.0, 4.0], [0, 1, 2])
    b = beta_sweep(sc, [1.0, 4.0], [0, 1, 2], workers=2)
    assert a == b
    with pytest.raises(ConfigError):
        beta_sweep(sc, [], [0])
    with pytest.raises(ConfigError):
        beta_sweep(sc, [1.0], [])


def test_beta_trend_is_visible_at_low_floor():
    # with a low guaranteed floor gamma stays well inside (gamma_min, 1)
    sc = scenario(n=4000, r_min=0.2)
    (b1, g1), (b4, g4) = beta_sweep(sc, [1.0, 4.0], [0, 1, 2])
    assert g4 - g1 > 0.3
