"""Utility accounting for primary users.

A primary user of type ``theta`` that bought rate ``r_p`` at unit price ``p_p``
and was allocated ``g`` against a demand ``d`` gets

    theta * g - r_p * p_p + lambda * max(0, d - g)
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .limiter import indicator_ramp


@dataclass(frozen=True)
class PrimaryContract:
    purchased_rate: float
    theta: float = 1.0
    price_p: float = 0.1
    lambda_penalty: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError(f"theta must lie in [0, 1], got {self.theta}")
        if not 0.0 < self.purchased_rate <= 1.0:
            raise DomainError(f"purchased_rate must lie in (0, 1], got {self.purchased_rate}")
        if self.price_p < 0:
            raise DomainError("price_p must be non-negative")
        if self.lambda_penalty < 0:
            raise DomainError("lambda_penalty must be non-negative")


@dataclass(frozen=True)
class UtilityBreakdown:
    service_value: float
    payment: float
    compensation: float

    @property
    def total(self) -> float:
        return self.service_value - self.payment + self.compensation


def primary_utility(contract: PrimaryContract, allocated: float, demand: float) -> UtilityBreakdown:
    return UtilityBreakdown(
        service_value=contract.theta * allocated,
        payment=contract.purchased_rate * contract.price_p,
        compensation=contract.lambda_penalty * indicator_ramp(demand - allocated),
    )


def primary_participation_bound(p_p: float, r_min: float) -> float:
    """Lowest type whose utility stays non-negative whatever the allocation."""
    if r_min <= 0:
        raise DomainError(f"r_min must be positive, got {r_min}")
    return p_p / r_min


def mean_primary_utility(
    p_p: float,
    r_min: float,
    r_p: float,
    lambda_penalty: float,
    allocated: float,
    demand: float,
) -> tuple[float, bool]:
    """Utility integrated over types in ``[p_p/r_min, 1]``.

    Returns ``(value, participating)``; when the threshold is at or above 1
    no type participates and the value is 0.
    """
    lo = primary_participation_bound(p_p, r_min)
    if lo >= 1.0:
        return 0.0, False
    value = 0.5 * (1.0 - lo * lo) * allocated + (
        lambda_penalty * indicator_ramp(demand - allocated) - r_p * p_p
    ) * (1.0 - lo)
    return value, True
