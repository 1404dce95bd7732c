"""Ruin with risky investment: simulation, certain-ruin experiments and densities."""

from .errors import AccuracyError, ConfigError, DomainError, RuinlabError, SmallTimeRefusal
from .model import (
    GBM,
    ConstantPremium,
    ExpLevy,
    Exponential,
    HyperbolicPoint,
    LogNormal,
    Pareto,
    PremiumFunction,
    Regime,
    RiskParams,
    certain_ruin_regime,
    deterministic_interest,
    diffusion_limit_ruin,
    safety_loading,
    sinusoidal_premium,
)
from .processes import DeterministicSchedule, LevyJumpSpec, Poisson, Renewal, SeedSpec
from .paths import Scheme, SchemeConfig, check_boundedness, simulate_classical, simulate_invested
from .ruin_mc import certain_ruin_experiment, estimate_diffusion_ruin, estimate_ruin
from .yor import mc_oracle_joint, theta, yor_density, yor_density_scaled
from .density import (
    DensityConvention,
    DiffusionRiskParams,
    mc_density_oracle,
    ruin_probability_at,
    transition_density,
)

__version__ = "0.1.0"
