"""Two-class ISP bandwidth management: secondary-service market equilibrium,
adaptive primary-user limiters and long-range-dependent demand traces."""

from .errors import ConfigError, DomainError
from .estimator import EstimatorState, gradient, tracking_error, update
from .limiter import (
    LimiterParams,
    ShortfallWindow,
    indicator_ramp,
    indicator_step,
    limiter,
    push_slot,
    window_alpha,
)
from .market import (
    IspConfig,
    MarketEquilibrium,
    OfferedPlan,
    equilibrium,
    market_ratio,
    mean_secondary_income,
    mean_secondary_utility,
    optimal_secondary_population,
    primary_split,
    qos_secondary,
    ratio_bounds,
    secondary_bandwidth_for_ratio,
    validity_region,
)
from .sim import RunSummary, Scenario, SlotRecord, beta_sweep, run, secondary_uplift
from .traffic import TrafficSpec, TrafficTrace, ar_coefficients, estimate_hurst, generate
from .utility import (
    PrimaryContract,
    UtilityBreakdown,
    mean_primary_utility,
    primary_participation_bound,
    primary_utility,
)

__version__ = "0.1.0"
