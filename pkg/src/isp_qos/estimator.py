"""Online steepest-descent fit of the limiter weights and exponent.

Each slot, once the user's demand is known, the weights ``omega`` and the
exponent ``gamma`` take one gradient step on

    F = (g(r_p, alpha) - demand) ** 2

with the shortfall flags in the window held fixed at their realised values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .limiter import LimiterParams, ShortfallWindow, clamp_alpha, window_alpha

DEFAULT_RHO = 0.05
DEFAULT_WINDOW = 10
DEFAULT_GAMMA = 0.5
DEFAULT_OMEGA = 0.5
DEFAULT_GAMMA_MIN = 0.05


@dataclass(frozen=True)
class EstimatorState:
    window: ShortfallWindow
    gamma: float = DEFAULT_GAMMA
    step_rho: float = DEFAULT_RHO
    gamma_min: float = DEFAULT_GAMMA_MIN

    def __post_init__(self):
        if not 0.0 < self.gamma_min <= 1.0:
            raise DomainError(f"gamma_min must lie in (0, 1], got {self.gamma_min}")
        if not self.gamma_min <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [{self.gamma_min}, 1], got {self.gamma}")
        if self.step_rho <= 0.0:
            raise DomainError(f"step size must be positive, got {self.step_rho}")

    @classmethod
    def initial(
        cls,
        window_t: int = DEFAULT_WINDOW,
        gamma: float = DEFAULT_GAMMA,
        omega: float = DEFAULT_OMEGA,
        step_rho: float = DEFAULT_RHO,
        gamma_min: float = DEFAULT_GAMMA_MIN,
    ) -> EstimatorState:
        return cls(ShortfallWindow.empty(window_t, omega), gamma, step_rho, gamma_min)

    @property
    def weights(self) -> np.ndarray:
        return self.window.weights

    def limiter_params(self, r_min: float, purchased_rate: float) -> LimiterParams:
        return LimiterParams(self.gamma, r_min, purchased_rate)

    def to_row(self, slot: int) -> list[float]:
        """CSV row ``slot,gamma,omega_0..omega_{t-1}``."""
        return [slot, self.gamma, *self.weights.tolist()]

    @classmethod
    def from_row(
        cls,
        row: list[float],
        step_rho: float = DEFAULT_RHO,
        gamma_min: float = DEFAULT_GAMMA_MIN,
    ) -> tuple[int, EstimatorState]:
        slot, gamma, *omega = row
        window = ShortfallWindow(len(omega), np.asarray(omega, dtype=float))
        return int(slot), cls(window, float(gamma), step_rho, gamma_min)


def state_csv_header(window_t: int) -> list[str]:
    return ["slot", "gamma"] + [f"omega_{j}" for j in range(window_t)]


def _eval(state: EstimatorState, params: LimiterParams, demand: float):
    # gamma comes from the state; params only supplies the rate bounds
    alpha = clamp_alpha(window_alpha(state.window))
    power = alpha**state.gamma
    residual = params.span * power + params.r_min - demand
    return alpha, power, residual


def tracking_error(state: EstimatorState, params: LimiterParams, demand: float) -> float:
    """Squared gap between the limiter output at the window's alpha and ``demand``.

    Alpha is clamped to [ALPHA_EPS, 1] here, the same point at which
    :func:`gradient` is evaluated.
    """
    _, _, residual = _eval(state, params, demand)
    return residual * residual


def gradient(
    state: EstimatorState, params: LimiterParams, demand: float
) -> tuple[np.ndarray, float]:
    """Return ``(dF/domega, dF/dgamma)`` at the current state."""
    alpha, power, residual = _eval(state, params, demand)
    t = state.window.window_t
    common = 2.0 * residual * params.span
    d_omega = common * state.gamma * power / alpha * state.window.flag_vector() / t
    d_gamma = common * power * math.log(alpha)
    return d_omega, d_gamma


def update(state: EstimatorState, params: LimiterParams, demand: float) -> EstimatorState:
    """One projected steepest-descent step after observing ``demand``."""
    d_omega, d_gamma = gradient(state, params, demand)
    omega = np.clip(state.weights - state.step_rho * d_omega, 0.0, 1.0)
    gamma = min(max(state.gamma - state.step_rho * d_gamma, state.gamma_min), 1.0)
    return replace(state, window=state.window.with_weights(omega), gamma=gamma)
