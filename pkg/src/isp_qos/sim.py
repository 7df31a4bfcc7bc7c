"""Timeslot simulation of primary users behind adaptive limiters.

Each primary user is simulated independently. Per slot: pick alpha from the
shortfall window (full purchased rate until the window has filled), allocate
through the limiter, reveal the demand, book shortfall/penalty/utility, let
the estimator take one step, and push the slot's flag into the window.
Secondary users are not simulated; the rate released by the limiters is
converted into a QoS gain for the secondary pool in closed form.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import estimator as est
from .errors import ConfigError, DomainError
from .limiter import LimiterParams, indicator_ramp, limiter, push_slot, window_alpha
from .market import IspConfig, equilibrium
from .traffic import TrafficSpec, TrafficTrace, generate
from .utility import PrimaryContract, UtilityBreakdown, primary_utility

LEDGER_HEADER = ["slot", "user", "demand", "alpha", "allocated", "shortfall", "penalty", "utility", "gamma"]


@dataclass(frozen=True)
class EstimatorDefaults:
    rho: float = est.DEFAULT_RHO
    gamma0: float = est.DEFAULT_GAMMA
    omega0: float = est.DEFAULT_OMEGA
    gamma_min: float = est.DEFAULT_GAMMA_MIN


@dataclass(frozen=True)
class PrimaryUser:
    contract: PrimaryContract
    traffic: TrafficSpec
    # replaces the generated trace when set (tests, imported traces)
    trace: TrafficTrace | None = None

    def demand(self) -> np.ndarray:
        return (self.trace or generate(self.traffic)).samples


@dataclass(frozen=True)
class Scenario:
    isp: IspConfig
    primary_users: tuple[PrimaryUser, ...]
    n_slots: int
    seed: int = 0
    estimator_defaults: EstimatorDefaults = field(default_factory=EstimatorDefaults)

    def validate(self) -> None:
        if not self.primary_users:
            raise ConfigError("scenario needs at least one primary user")
        if self.n_slots < 1:
            raise ConfigError("n_slots must be >= 1")
        for i, u in enumerate(self.primary_users):
            if u.traffic.n_slots != self.n_slots:
                raise ConfigError(f"user {i}: trace length {u.traffic.n_slots} != n_slots {self.n_slots}")
            if u.trace is not None and len(u.trace) != self.n_slots:
                raise ConfigError(f"user {i}: supplied trace has {len(u.trace)} slots")
            if u.contract.purchased_rate != u.traffic.purchased_rate:
                raise ConfigError(f"user {i}: contract and traffic disagree on the purchased rate")
            if not self.isp.r_min < u.contract.purchased_rate:
                raise ConfigError(f"user {i}: purchased rate must exceed r_min={self.isp.r_min}")
        d = self.estimator_defaults
        try:
            est.EstimatorState.initial(self.isp.window_t, d.gamma0, d.omega0, d.rho, d.gamma_min)
        except DomainError as exc:
            raise ConfigError(f"bad estimator defaults: {exc}") from exc


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    user: int
    demand: float
    alpha: float
    allocated: float
    shortfall: float
    penalty: float
    utility: UtilityBreakdown
    gamma: float

    def csv_row(self) -> list:
        return [
            self.slot,
            self.user,
            *(f"{v:.12g}" for v in (self.demand, self.alpha, self.allocated, self.shortfall,
                                     self.penalty, self.utility.total, self.gamma)),
        ]


@dataclass(frozen=True)
class RunSummary:
    mean_allocated: float
    mean_demand: float
    shortfall_fraction: float
    total_penalty: float
    saved_bandwidth: float
    final_gamma: float
    secondary_qos_uplift: float
    capacity_violations: int = 0

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def qos_uplift(z_s: float, c_s: float, extra_bw: float) -> float:
    """Rise in secondary QoS when ``extra_bw`` is added to the secondary pool ``c_s``."""
    if c_s <= 0:
        raise DomainError(f"c_s must be positive, got {c_s}")
    if extra_bw < 0:
        raise DomainError(f"extra bandwidth must be non-negative, got {extra_bw}")
    return z_s / c_s - z_s / (c_s + extra_bw)


def secondary_uplift(isp: IspConfig, saved_bandwidth: float, z_s: float) -> float:
    """QoS gain of the secondary pool from primary rate the limiters left unused.

    ``saved_bandwidth`` is in units of the primary pool (rates are normalised
    by it), so it is scaled by the per-user primary bandwidth ``x * c``.
    """
    eq = equilibrium(isp)
    x = min(max(eq.split_x, 0.0), 1.0)
    c_p = x * isp.total_bw_per_user
    c_s = (1.0 - x) * isp.total_bw_per_user
    return qos_uplift(z_s, c_s, saved_bandwidth * c_p)


class _UserRun:
    """Simulation loop state for one primary user."""

    def __init__(self, scenario: Scenario, index: int):
        self.user = index
        self.contract = scenario.primary_users[index].contract
        self.r_min = scenario.isp.r_min
        d = scenario.estimator_defaults
        self.state = est.EstimatorState.initial(scenario.isp.window_t, d.gamma0, d.omega0, d.rho, d.gamma_min)

    def allocate(self) -> tuple[float, float, LimiterParams]:
        params = self.state.limiter_params(self.r_min, self.contract.purchased_rate)
        alpha = window_alpha(self.state.window) if self.state.window.full else 1.0
        return alpha, limiter(params, alpha), params

    def step(self, k: int, demand: float) -> SlotRecord:
        gamma = self.state.gamma
        alpha, allocated, params = self.allocate()
        shortfall = indicator_ramp(demand - allocated)
        rec = SlotRecord(
            slot=k,
            user=self.user,
            demand=float(demand),
            alpha=alpha,
            allocated=allocated,
            shortfall=shortfall,
            penalty=self.contract.lambda_penalty * shortfall,
            utility=primary_utility(self.contract, allocated, demand),
            gamma=gamma,
        )
        # fit the window that produced this slot's allocation to this slot's demand
        if self.state.window.full:
            self.state = est.update(self.state, params, demand)
        self.state = replace(self.state, window=push_slot(self.state.window, demand, allocated))
        return rec


def simulate_user(scenario: Scenario, index: int, demand: Sequence[float] | None = None):
    """Run one user's slot loop; returns its records and final estimator state."""
    if demand is None:
        demand = scenario.primary_users[index].demand()
    run = _UserRun(scenario, index)
    records = [run.step(k, d) for k, d in enumerate(demand)]
    return records, run.state


def run(scenario: Scenario) -> tuple[list[SlotRecord], RunSummary]:
    scenario.validate()
    per_user = []
    finals = []
    for i in range(len(scenario.primary_users)):
        records, state = simulate_user(scenario, i)
        per_user.append(records)
        finals.append(state.gamma)
    ledger = [r for slot in zip(*per_user) for r in slot]
    return ledger, summarize(scenario, per_user, finals)


def summarize(scenario: Scenario, per_user: list[list[SlotRecord]], final_gammas, skip: int = 0) -> RunSummary:
    """Aggregate per-user ledgers; the first ``skip`` slots are left out."""
    alloc = np.array([[r.allocated for r in recs[skip:]] for recs in per_user])
    demand = np.array([[r.demand for r in recs[skip:]] for recs in per_user])
    short = np.array([[r.shortfall for r in recs[skip:]] for recs in per_user])
    rates = np.array([u.contract.purchased_rate for u in scenario.primary_users])[:, None]
    lambdas = np.array([u.contract.lambda_penalty for u in scenario.primary_users])[:, None]
    saved = rates - alloc

    eq = equilibrium(scenario.isp)
    try:
        per_slot_saved = saved.sum(axis=0)
        uplift = float(np.mean([secondary_uplift(scenario.isp, s, eq.z_s_star) for s in per_slot_saved]))
    except DomainError:
        # no secondary pool to receive the released rate
        uplift = float("nan")

    return RunSummary(
        mean_allocated=float(alloc.mean()),
        mean_demand=float(demand.mean()),
        shortfall_fraction=float((short > 0).mean()),
        total_penalty=float((lambdas * short).sum()),
        saved_bandwidth=float(saved.mean()),
        final_gamma=float(np.mean(final_gammas)),
        secondary_qos_uplift=uplift,
        capacity_violations=int((alloc.sum(axis=0) > 1.0).sum()),
    )


def write_ledger_csv(records: Sequence[SlotRecord], fh, window: tuple[int, int] | None = None) -> int:
    """Write ledger rows, optionally only slots ``a..b`` inclusive; returns rows written."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(LEDGER_HEADER)
    n = 0
    for r in records:
        if window is not None and not window[0] <= r.slot <= window[1]:
            continue
        w.writerow(r.csv_row())
        n += 1
    return n


def write_summary(summary: RunSummary, fh) -> None:
    """Summary as ``key = value`` lines followed by a one-row CSV."""
    d = summary.as_dict()
    for k, v in d.items():
        fh.write(f"# {k} = {_fmt(v)}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(d))
    w.writerow([_fmt(v) for v in d.values()])


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else f"{v:.12g}"


def with_beta(scenario: Scenario, beta_b: float, seed: int) -> Scenario:
    users = tuple(
        replace(u, traffic=replace(u.traffic, beta_b=beta_b, seed=derive_seed(seed, i)), trace=None)
        for i, u in enumerate(scenario.primary_users)
    )
    return replace(scenario, primary_users=users, seed=seed)


def derive_seed(seed: int, user: int) -> int:
    """Per-user trace seed split off a scenario seed."""
    return int(np.random.SeedSequence([seed, user]).generate_state(1, dtype=np.uint64)[0])


def _final_gamma(scenario: Scenario) -> float:
    return run(scenario)[1].final_gamma


def beta_sweep(
    template: Scenario,
    beta_b_values: Sequence[float],
    seeds: Sequence[int],
    workers: int = 1,
) -> list[tuple[float, float]]:
    """Mean final gamma over ``seeds`` for each beta shape ``b`` of the demand."""
    if not beta_b_values:
        raise ConfigError("beta_sweep needs at least one beta value")
    if not seeds:
        raise ConfigError("beta_sweep needs at least one seed")
    jobs = [with_beta(template, b, s) for b in beta_b_values for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            gammas = list(pool.map(_final_gamma, jobs))
    else:
        gammas = [_final_gamma(j) for j in jobs]
    g = np.array(gammas).reshape(len(beta_b_values), len(seeds))
    return [(float(b), float(row.mean())) for b, row in zip(beta_b_values, g)]
