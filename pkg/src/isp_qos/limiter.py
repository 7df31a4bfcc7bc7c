"""Limiter function, indicator functions and the sliding shortfall window.

The allocated rate for a primary user at slot ``k`` is

    g(r_p, alpha_k) = (r_p - r_min) * alpha_k ** gamma + r_min

where ``alpha_k`` is a weighted fraction of the last ``t`` slots in which the
user's demand reached (or exceeded) the allocation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

ALPHA_EPS = 1e-6


def indicator_step(x: float) -> int:
    """0 for negative input, 1 otherwise (including exactly zero)."""
    return 0 if x < 0 else 1


def indicator_ramp(x: float) -> float:
    """Positive part of ``x``; used for the unmet-demand penalty."""
    return 0.0 if x < 0 else float(x)


@dataclass(frozen=True)
class LimiterParams:
    gamma: float
    r_min: float
    purchased_rate: float

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0.0 < self.r_min < self.purchased_rate <= 1.0:
            raise DomainError(
                "need 0 < r_min < purchased_rate <= 1, got "
                f"r_min={self.r_min}, purchased_rate={self.purchased_rate}"
            )

    @property
    def span(self) -> float:
        return self.purchased_rate - self.r_min


def limiter(params: LimiterParams, alpha: float) -> float:
    """Rate allocated for adjusting parameter ``alpha`` in [0, 1]."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return params.span * alpha**params.gamma + params.r_min


@dataclass(frozen=True)
class ShortfallWindow:
    """Last ``window_t`` shortfall flags, oldest first, plus per-position weights.

    ``weights[j]`` multiplies the flag at window position ``j`` where position
    ``window_t - 1`` is the most recent slot. While the history is shorter than
    ``window_t`` the flags are aligned to the tail of ``weights``.
    """

    window_t: int
    weights: np.ndarray
    flags: tuple[int, ...] = ()

    def __post_init__(self):
        if self.window_t < 1:
            raise DomainError(f"window length must be >= 1, got {self.window_t}")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.window_t,):
            raise DomainError(f"expected {self.window_t} weights, got shape {w.shape}")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise DomainError("window weights must lie in [0, 1]")
        if len(self.flags) > self.window_t:
            raise DomainError("more flags than the window length")
        object.__setattr__(self, "weights", w)

    @classmethod
    def empty(cls, window_t: int, weight: float = 0.5) -> ShortfallWindow:
        return cls(window_t, np.full(window_t, float(weight)))

    @property
    def full(self) -> bool:
        return len(self.flags) == self.window_t

    def flag_vector(self) -> np.ndarray:
        """Flags padded with leading zeros to ``window_t`` entries."""
        v = np.zeros(self.window_t)
        if self.flags:
            v[self.window_t - len(self.flags):] = self.flags
        return v

    def with_weights(self, weights: Sequence[float]) -> ShortfallWindow:
        return ShortfallWindow(self.window_t, np.asarray(weights, dtype=float), self.flags)


def window_alpha(window: ShortfallWindow) -> float:
    """Weighted shortfall frequency over the window.

    The sum is divided by the window length, not by the sum of weights, so the
    result stays in [0, 1] as long as every weight does.
    """
    return float(window.weights @ window.flag_vector()) / window.window_t


def clamp_alpha(alpha: float) -> float:
    """Keep ``alpha`` inside [ALPHA_EPS, 1] so ``alpha**gamma`` and ``log(alpha)`` stay finite."""
    return min(max(alpha, ALPHA_EPS), 1.0)


def push_slot(window: ShortfallWindow, demand: float, allocated: float) -> ShortfallWindow:
    """Return the window with this slot's flag appended and the oldest evicted."""
    flags = window.flags + (indicator_step(demand - allocated),)
    if len(flags) > window.window_t:
        flags = flags[-window.window_t:]
    return ShortfallWindow(window.window_t, window.weights, flags)
