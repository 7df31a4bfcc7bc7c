"""Line-oriented ``key = value`` scenario configs (INI sections).

Sections::

    [isp]        total_bw, price_s, qos_min, price_p, r_min, lambda, tau, window_t
    [scenario]   n_slots, seed
    [estimator]  rho, gamma0, omega0, gamma_min
    [user.N]     purchased_rate, theta, beta_a, beta_b, hurst, seed (optional),
                 trace (optional path to a slot,demand CSV replacing generation)
    [traffic]    beta_a, beta_b, hurst, purchased_rate, n_slots, seed
    [market]     c_min, c_max, c_points  or  c = v1, v2, ...; e_min, e_max, e_points
    [sweep]      beta_b = 1, 2, 3, 4; seeds = 0, 1, 2; workers

Missing keys fall back to the defaults in ``DEFAULTS``.
"""

from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .market import IspConfig, OfferedPlan
from .sim import EstimatorDefaults, PrimaryUser, Scenario, derive_seed
from .traffic import TrafficSpec, read_trace_csv
from .utility import PrimaryContract

DEFAULTS = {
    "isp": {
        "total_bw": "1.0",
        "price_s": "0.25",
        "qos_min": "0.5",
        "price_p": "0.1",
        "r_min": "0.4",
        "lambda": "1.0",
        "tau": "0.0",
        "window_t": "10",
    },
    "scenario": {"n_slots": "10000", "seed": "0"},
    "estimator": {"rho": "0.05", "gamma0": "0.5", "omega0": "0.5", "gamma_min": "0.05"},
    "traffic": {
        "beta_a": "3",
        "beta_b": "4",
        "hurst": "0.8",
        "purchased_rate": "0.6",
        "n_slots": "10000",
        "seed": "0",
    },
    "market": {"c_min": "0.1", "c_max": "2.0", "c_points": "100", "e_min": "0.05", "e_max": "1.0", "e_points": "96"},
    "sweep": {"beta_b": "1, 2, 3, 4", "seeds": "0, 1, 2, 3, 4", "workers": "1"},
    "user.0": {"purchased_rate": "0.6", "theta": "1.0", "beta_a": "3", "beta_b": "4", "hurst": "0.8"},
}


def load(path: str | Path | None, seed: int | None = None) -> configparser.ConfigParser:
    """Read ``path`` over the defaults; ``seed`` overrides both seed keys."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_dict(DEFAULTS)
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        try:
            cp.read_string(text, source=str(p))
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {p}: {exc}") from exc
        # a config that names its own users replaces the default one
        if any(s.startswith("user.") for s in _sections(text)):
            _drop_default_users(cp, _sections(text))
    if seed is not None:
        cp["scenario"]["seed"] = str(seed)
        cp["traffic"]["seed"] = str(seed)
    return cp


def _sections(text: str) -> set[str]:
    probe = configparser.ConfigParser(interpolation=None)
    probe.read_string(text)
    return set(probe.sections())


def _drop_default_users(cp, present: set[str]) -> None:
    for s in list(cp.sections()):
        if s.startswith("user.") and s not in present:
            cp.remove_section(s)


def echo(cp: configparser.ConfigParser) -> str:
    """Resolved config as ``#``-prefixed lines."""
    lines = []
    for s in cp.sections():
        lines.append(f"# [{s}]")
        lines.extend(f"# {k} = {v}" for k, v in cp[s].items())
    return "\n".join(lines) + "\n"


def _get(cp, section, key, conv):
    raw = cp[section][key]
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _floats(raw: str) -> list[float]:
    return [float(v) for v in raw.replace(",", " ").split()]


def _ints(raw: str) -> list[int]:
    return [int(v) for v in raw.replace(",", " ").split()]


def isp_config(cp) -> IspConfig:
    try:
        plan = OfferedPlan(
            _get(cp, "isp", "price_s", float),
            _get(cp, "isp", "qos_min", float),
            _get(cp, "isp", "price_p", float),
        )
        return IspConfig(
            total_bw_per_user=_get(cp, "isp", "total_bw", float),
            plan=plan,
            r_min=_get(cp, "isp", "r_min", float),
            lambda_penalty=_get(cp, "isp", "lambda", float),
            tau_cost=_get(cp, "isp", "tau", float),
            window_t=_get(cp, "isp", "window_t", int),
        )
    except DomainError as exc:
        raise ConfigError(f"[isp] {exc}") from exc


def traffic_spec(cp) -> TrafficSpec:
    s = "traffic"
    try:
        return TrafficSpec(
            beta_a=_get(cp, s, "beta_a", float),
            beta_b=_get(cp, s, "beta_b", float),
            hurst=_get(cp, s, "hurst", float),
            purchased_rate=_get(cp, s, "purchased_rate", float),
            n_slots=_get(cp, s, "n_slots", int),
            seed=_get(cp, s, "seed", int),
        )
    except DomainError as exc:
        raise ConfigError(f"[traffic] {exc}") from exc


def scenario(cp) -> Scenario:
    isp = isp_config(cp)
    n_slots = _get(cp, "scenario", "n_slots", int)
    seed = _get(cp, "scenario", "seed", int)
    user_sections = sorted((s for s in cp.sections() if s.startswith("user.")), key=_user_index)
    users = []
    for i, s in enumerate(user_sections):
        get = lambda key, conv, default=None: _get(cp, s, key, conv) if key in cp[s] else default
        rate = get("purchased_rate", float, 0.6)
        user_seed = get("seed", int)
        try:
            contract = PrimaryContract(
                purchased_rate=rate,
                theta=get("theta", float, 1.0),
                price_p=isp.plan.price_p,
                lambda_penalty=isp.lambda_penalty,
            )
            spec = TrafficSpec(
                beta_a=get("beta_a", float, 3.0),
                beta_b=get("beta_b", float, 4.0),
                hurst=get("hurst", float, 0.8),
                purchased_rate=rate,
                n_slots=n_slots,
                seed=derive_seed(seed, i) if user_seed is None else user_seed,
            )
        except DomainError as exc:
            raise ConfigError(f"[{s}] {exc}") from exc
        trace = None
        if "trace" in cp[s]:
            try:
                trace = read_trace_csv(Path(cp[s]["trace"]))
            except (OSError, KeyError, ValueError) as exc:
                raise ConfigError(f"[{s}] cannot load trace: {exc}") from exc
            spec = trace.spec
        users.append(PrimaryUser(contract, spec, trace))
    defaults = EstimatorDefaults(
        rho=_get(cp, "estimator", "rho", float),
        gamma0=_get(cp, "estimator", "gamma0", float),
        omega0=_get(cp, "estimator", "omega0", float),
        gamma_min=_get(cp, "estimator", "gamma_min", float),
    )
    sc = Scenario(isp, tuple(users), n_slots, seed, defaults)
    sc.validate()
    return sc


def _user_index(section: str) -> int:
    try:
        return int(section.split(".", 1)[1])
    except ValueError as exc:
        raise ConfigError(f"user sections are named user.N, got [{section}]") from exc


def c_grid(cp) -> list[float]:
    m = cp["market"]
    if "c" in m:
        grid = _get(cp, "market", "c", _floats)
    else:
        grid = np.linspace(
            _get(cp, "market", "c_min", float),
            _get(cp, "market", "c_max", float),
            _get(cp, "market", "c_points", int),
        ).tolist()
    if any(c <= 0 for c in grid):
        raise ConfigError("[market] bandwidth grid values must be positive")
    return grid


def e_grid(cp) -> list[float]:
    grid = np.linspace(
        _get(cp, "market", "e_min", float),
        _get(cp, "market", "e_max", float),
        _get(cp, "market", "e_points", int),
    ).tolist()
    if any(e <= 0 for e in grid):
        raise ConfigError("[market] ratio grid values must be positive")
    return grid


def sweep_params(cp) -> tuple[list[float], list[int], int]:
    betas = _get(cp, "sweep", "beta_b", _floats)
    seeds = _get(cp, "sweep", "seeds", _ints)
    if not betas:
        raise ConfigError("[sweep] beta_b list is empty")
    if not seeds:
        raise ConfigError("[sweep] seeds list is empty")
    if any(b <= 0 for b in betas):
        raise ConfigError("[sweep] beta_b values must be positive")
    return betas, seeds, _get(cp, "sweep", "workers", int)
