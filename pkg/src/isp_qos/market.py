"""Closed-form equilibrium of the secondary (best-effort) service.

Types are uniform on [0, 1]; a secondary user joins when its type is at least
the market ratio ``E`` (lowest price over minimum QoS across ISPs), so the
secondary population is ``1 - E``. All bandwidths and populations are
normalised per end user.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError

# positive root of 3E^2 - E - 1 = 0, i.e. primary_split(E, c) = 1 for any c
E_UPPER = (1.0 + math.sqrt(13.0)) / 6.0

# rounding slack for the validity flag at E_l and E_u
SPLIT_TOL = 1e-12

REGION_HEADER = ["c", "e_lower", "e_upper", "region_empty"]


@dataclass(frozen=True)
class OfferedPlan:
    price_s: float
    qos_min: float
    price_p: float = 1.0

    def __post_init__(self):
        if self.price_s <= 0:
            raise DomainError(f"price_s must be positive, got {self.price_s}")
        if not 0.0 < self.qos_min <= 1.0:
            raise DomainError(f"qos_min must lie in (0, 1], got {self.qos_min}")
        if self.price_p <= 0:
            raise DomainError(f"price_p must be positive, got {self.price_p}")

    @property
    def ratio(self) -> float:
        return self.price_s / self.qos_min


@dataclass(frozen=True)
class IspConfig:
    """Economic and policy parameters of one ISP.

    ``tau_cost`` is kept for bookkeeping only; no computation reads it.
    """

    total_bw_per_user: float
    plan: OfferedPlan
    r_min: float
    lambda_penalty: float = 1.0
    tau_cost: float = 0.0
    window_t: int = 10

    def __post_init__(self):
        if self.total_bw_per_user <= 0:
            raise DomainError("total_bw_per_user must be positive")
        if not 0.0 < self.r_min < 1.0:
            raise DomainError(f"r_min must lie in (0, 1), got {self.r_min}")
        if self.lambda_penalty < 0:
            raise DomainError("lambda_penalty must be non-negative")
        if self.window_t < 1:
            raise DomainError("window_t must be >= 1")


@dataclass(frozen=True)
class MarketEquilibrium:
    ratio_e: float
    z_s_star: float
    c_s: float
    split_x: float
    split_valid: bool
    e_lower: float
    e_upper: float


def market_ratio(plans: Sequence[OfferedPlan]) -> float:
    if not plans:
        raise DomainError("market_ratio needs at least one plan")
    return min(p.ratio for p in plans)


def primary_price(plans: Sequence[OfferedPlan]) -> float:
    """Balanced primary price: the lowest per-unit price on the market."""
    if not plans:
        raise DomainError("primary_price needs at least one plan")
    return min(p.price_p for p in plans)


def qos_secondary(z_s: float, c_s: float) -> float:
    """QoS ``1 - z_s/c_s``; negative values mean overload and are returned as is."""
    if c_s <= 0:
        raise DomainError(f"c_s must be positive, got {c_s}")
    if z_s < 0:
        raise DomainError(f"z_s must be non-negative, got {z_s}")
    return 1.0 - z_s / c_s


def equilibrium_roots(c_s: float) -> tuple[float, float]:
    """Both roots of ``3E^2 + 2(c_s - 1)E - 1 = 0``, larger first."""
    b = 1.0 - c_s
    disc = math.sqrt(b * b + 3.0)
    return (b + disc) / 3.0, (b - disc) / 3.0


def optimal_secondary_population(c_s: float) -> float:
    """Secondary population maximising mean income for bandwidth ``c_s``."""
    if c_s <= 0:
        raise DomainError(f"c_s must be positive, got {c_s}")
    return 1.0 - equilibrium_roots(c_s)[0]


def secondary_bandwidth_for_ratio(e: float) -> float:
    """Bandwidth per user at which ``1 - e`` is the income-maximising population."""
    if e <= 0:
        raise DomainError(f"E must be positive, got {e}")
    return 1.0 - 1.5 * e + 0.5 / e


def primary_split(e: float, c_total: float) -> tuple[float, bool]:
    """Raw fraction ``x`` of bandwidth given to primary service, and whether it lies in [0, 1].

    The value is not clamped; callers that need an allocation clamp it.
    """
    if e <= 0:
        raise DomainError(f"E must be positive, got {e}")
    if c_total <= 0:
        raise DomainError(f"c_total must be positive, got {c_total}")
    x = 1.0 + (3.0 * e - 1.0 / e - 1.0) / (2.0 * c_total)
    return x, -SPLIT_TOL <= x <= 1.0 + SPLIT_TOL


def ratio_bounds(c_total: float) -> tuple[float, float]:
    """``(E_l, E_u)``: ratios at which the primary split is 0 and 1."""
    if c_total <= 0:
        raise DomainError(f"c_total must be positive, got {c_total}")
    b = 1.0 - 2.0 * c_total
    e_lower = (b + math.sqrt(b * b + 12.0)) / 6.0
    return e_lower, E_UPPER


def validity_region(c_grid: Iterable[float]) -> list[tuple[float, float, float, bool]]:
    rows = []
    for c in c_grid:
        if c <= 0:
            raise DomainError(f"grid values must be positive, got {c}")
        lo, hi = ratio_bounds(c)
        rows.append((float(c), lo, hi, lo >= hi))
    return rows


def write_region_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REGION_HEADER)
    for c, lo, hi, empty in rows:
        w.writerow([f"{c:.12g}", f"{lo:.12g}", f"{hi:.12g}", int(empty)])


def mean_secondary_income(z_s: float, c_s: float) -> float:
    """Type-averaged income ``(c_s - z_s)(1 - (1 - z_s)^2) / (2 c_s)``."""
    if c_s <= 0:
        raise DomainError(f"c_s must be positive, got {c_s}")
    if not 0.0 <= z_s <= 1.0:
        raise DomainError(f"z_s must lie in [0, 1], got {z_s}")
    return (c_s - z_s) * (1.0 - (1.0 - z_s) ** 2) / (2.0 * c_s)


def mean_secondary_utility(z_s: float, c_s: float, p_s: float) -> float:
    """Mean of ``theta * q_s - p_s`` over admitted types ``theta`` in ``[1 - z_s, 1]``."""
    if p_s < 0:
        raise DomainError(f"p_s must be non-negative, got {p_s}")
    return mean_secondary_income(z_s, c_s) - p_s * z_s


def equilibrium(isp: IspConfig, plans: Sequence[OfferedPlan] | None = None) -> MarketEquilibrium:
    """Market quantities for ``isp`` given the plans on offer (defaults to its own).

    For ``E >= 1`` no type can afford the service, so the secondary
    population is zero.
    """
    e = market_ratio(plans if plans else [isp.plan])
    e_lower, e_upper = ratio_bounds(isp.total_bw_per_user)
    x, valid = primary_split(e, isp.total_bw_per_user)
    return MarketEquilibrium(
        ratio_e=e,
        z_s_star=max(0.0, 1.0 - e),
        c_s=secondary_bandwidth_for_ratio(e),
        split_x=x,
        split_valid=valid,
        e_lower=e_lower,
        e_upper=e_upper,
    )


def split_sweep(c_total: float, e_values: Iterable[float]) -> list[tuple[float, float, bool]]:
    """``(E, x, valid)`` rows for plotting the split against the market ratio."""
    return [(float(e), *primary_split(e, c_total)) for e in e_values]


def secondary_user_utility(theta: float, q_s: float, p_s: float) -> float:
    return theta * q_s - p_s
