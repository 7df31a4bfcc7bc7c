"""Burst traffic with a beta marginal and long-range dependence.

Pipeline: unit Gaussian innovations are passed through an order-10 AR filter
whose coefficients solve the Yule-Walker equations for fractional Gaussian
noise; after a burn-in the series is mapped through the normal CDF and the
inverse beta CDF, then scaled to the purchased rate.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import linalg, signal, stats

from .errors import DomainError

AR_ORDER = 10
BURN_IN = 1000
RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class TrafficSpec:
    beta_a: float = 3.0
    beta_b: float = 4.0
    hurst: float = 0.8
    purchased_rate: float = 0.6
    n_slots: int = 10000
    seed: int = 0
    ar_order: int = AR_ORDER

    def __post_init__(self):
        if self.beta_a <= 0 or self.beta_b <= 0:
            raise DomainError("beta shape parameters must be positive")
        if not 0.5 < self.hurst < 1.0:
            raise DomainError(f"hurst must lie in (0.5, 1), got {self.hurst}")
        if self.ar_order != AR_ORDER:
            raise DomainError(f"ar_order is fixed at {AR_ORDER}")
        if not 0.0 < self.purchased_rate <= 1.0:
            raise DomainError("purchased_rate must lie in (0, 1]")
        if self.n_slots < 1:
            raise DomainError("n_slots must be >= 1")


@dataclass(frozen=True)
class TrafficTrace:
    samples: np.ndarray
    spec: TrafficSpec

    def __len__(self):
        return len(self.samples)


def fgn_autocorrelation(hurst: float, lags) -> np.ndarray:
    k = np.abs(np.asarray(lags, dtype=float))
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)


def ar_coefficients(hurst: float, order: int = AR_ORDER) -> np.ndarray:
    """Yule-Walker AR coefficients ``phi`` with ``x_n = sum_j phi_j x_{n-j} + e_n``."""
    if not 0.5 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0.5, 1), got {hurst}")
    rho = fgn_autocorrelation(hurst, np.arange(order + 1))
    try:
        return linalg.solve_toeplitz(rho[:order], rho[1:])
    except linalg.LinAlgError as exc:
        raise ArithmeticError(f"singular Yule-Walker system for H={hurst}") from exc


def ar_gaussian(hurst: float, n: int, rng: np.random.Generator, burn_in: int = BURN_IN) -> np.ndarray:
    """Zero-mean, unit-variance AR approximation of fGn of length ``n``."""
    phi = ar_coefficients(hurst)
    rho = fgn_autocorrelation(hurst, np.arange(1, len(phi) + 1))
    # innovation variance that gives the filtered series unit variance
    sigma = np.sqrt(1.0 - phi @ rho)
    e = rng.standard_normal(n + burn_in) * sigma
    x = signal.lfilter([1.0], np.concatenate(([1.0], -phi)), e)
    return x[burn_in:]


def generate(spec: TrafficSpec) -> TrafficTrace:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    z = ar_gaussian(spec.hurst, spec.n_slots, rng)
    u = stats.norm.cdf(z)
    samples = stats.beta.ppf(u, spec.beta_a, spec.beta_b) * spec.purchased_rate
    return TrafficTrace(np.clip(samples, 0.0, spec.purchased_rate), spec)


def zero_trace(spec: TrafficSpec) -> TrafficTrace:
    """A trace whose demand is identically zero (idle user)."""
    return TrafficTrace(np.zeros(spec.n_slots), spec)


def estimate_hurst(samples, min_block: int = 8) -> float:
    """Rescaled-range Hurst estimate.

    Block sizes are powers of two from ``min_block`` to ``n/4``; for each
    size the series is cut into non-overlapping blocks and R/S is averaged
    over blocks with nonzero spread. The estimate is the least-squares
    slope of log mean R/S against log block size.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 256:
        raise DomainError(f"need at least 256 samples, got {n}")
    sizes, rs = [], []
    size = min_block
    while size <= n // 4:
        blocks = x[: (n // size) * size].reshape(-1, size)
        dev = np.cumsum(blocks - blocks.mean(axis=1, keepdims=True), axis=1)
        r = dev.max(axis=1) - dev.min(axis=1)
        s = blocks.std(axis=1)
        ok = s > 0
        if ok.any():
            sizes.append(size)
            rs.append(np.mean(r[ok] / s[ok]))
        size *= 2
    if len(sizes) < 2:
        raise DomainError("series has zero range; Hurst exponent undefined")
    slope, _ = np.polyfit(np.log(sizes), np.log(rs), 1)
    return float(slope)


def spec_comment(spec: TrafficSpec) -> str:
    fields = " ".join(f"{k}={v}" for k, v in asdict(spec).items())
    return f"# {fields} rng={RNG_ALGORITHM}"


def write_trace_csv(trace: TrafficTrace, fh) -> None:
    fh.write(spec_comment(trace.spec) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["slot", "demand"])
    for k, d in enumerate(trace.samples):
        w.writerow([k, f"{d:.12g}"])


def read_trace_csv(source) -> TrafficTrace:
    """Inverse of :func:`write_trace_csv`; accepts a path or the file text.

    Other ``#`` comment lines (config echo, summaries) are ignored.
    """
    text = Path(source).read_text() if isinstance(source, Path) else source
    lines = text.splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    spec_line = next((ln for ln in comments if "beta_a=" in ln), None)
    if spec_line is None:
        raise DomainError("trace file lacks the spec comment line")
    kv = dict(item.split("=", 1) for item in spec_line[1:].split() if "=" in item)
    spec = TrafficSpec(
        beta_a=float(kv["beta_a"]),
        beta_b=float(kv["beta_b"]),
        hurst=float(kv["hurst"]),
        purchased_rate=float(kv["purchased_rate"]),
        n_slots=int(kv["n_slots"]),
        seed=int(kv["seed"]),
        ar_order=int(kv["ar_order"]),
    )
    body = [ln for ln in lines if not ln.startswith("#")]
    samples = np.array([float(r["demand"]) for r in csv.DictReader(body)])
    if samples.size != spec.n_slots:
        raise DomainError(f"trace has {samples.size} rows, spec says {spec.n_slots}")
    return TrafficTrace(samples, spec)
