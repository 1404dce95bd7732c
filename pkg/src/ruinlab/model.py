"""Domain parameters and the closed-form scalar formulas of the risk model.

Rates are per year and currency is abstract.  ``m`` always denotes the raw
second moment E[Y^2] of a claim, which is what makes the aggregate claims
variance equal ``lambda * m * t`` for a compound Poisson process.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np

from .errors import DomainError

if TYPE_CHECKING:
    from .processes import CountingProcess, LevyJumpSpec


# --------------------------------------------------------------------------
# claim-size laws
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    """Exponential claims with the given mean."""

    mean_: float

    def __post_init__(self):
        if not self.mean_ > 0:
            raise DomainError(f"exponential mean must be positive, got {self.mean_}")

    def mean(self) -> float:
        return self.mean_

    def second_moment(self) -> float:
        return 2.0 * self.mean_**2

    def survival(self, y):
        return np.exp(-np.asarray(y, dtype=float) / self.mean_)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.exponential(self.mean_, size)


@dataclass(frozen=True)
class Pareto:
    """Pareto (Lomax) claims with survival ``(scale / (scale + y)) ** shape``.

    Support is (0, inf).  The mean is finite for shape > 1 and the second
    moment for shape > 2; outside those ranges the moments are ``inf``.
    """

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError(f"pareto shape and scale must be positive, got {self.shape}, {self.scale}")

    def mean(self) -> float:
        if self.shape <= 1:
            return math.inf
        return self.scale / (self.shape - 1.0)

    def second_moment(self) -> float:
        if self.shape <= 2:
            return math.inf
        return 2.0 * self.scale**2 / ((self.shape - 1.0) * (self.shape - 2.0))

    def survival(self, y):
        y = np.asarray(y, dtype=float)
        return (self.scale / (self.scale + y)) ** self.shape

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.scale * rng.pareto(self.shape, size)


@dataclass(frozen=True)
class LogNormal:
    """Log-normal claims: ``log Y ~ Normal(location, scale**2)``."""

    location: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"lognormal scale must be positive, got {self.scale}")

    def mean(self) -> float:
        return math.exp(self.location + 0.5 * self.scale**2)

    def second_moment(self) -> float:
        return math.exp(2.0 * self.location + 2.0 * self.scale**2)

    def survival(self, y):
        from scipy.special import ndtr

        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(y) - self.location) / self.scale
        return ndtr(-z)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.lognormal(self.location, self.scale, size)


ClaimLaw = Union[Exponential, Pareto, LogNormal]


def has_unbounded_support(law) -> bool:
    """True when ``P(Y > y) > 0`` for every y > 0.

    All built-in laws qualify; the check probes the survival function out to
    30 means (well inside the range where exponential tails underflow) so
    that user-supplied laws with a hard cap are caught.
    """
    scale = law.mean() if math.isfinite(law.mean()) else 1.0
    probe = np.array([10.0, 20.0, 30.0]) * scale
    return bool(np.all(law.survival(probe) > 0))


# --------------------------------------------------------------------------
# premiums
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantPremium:
    c: float

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise DomainError(f"premium rate must be finite and non-negative, got {self.c}")

    def rate(self, t):
        return np.full(np.shape(t), self.c, dtype=float)

    def cumulative(self, t):
        return self.c * np.asarray(t, dtype=float)

    def bound(self) -> float:
        return self.c


@dataclass(frozen=True)
class PremiumFunction:
    """A bounded, time-varying premium rate ``c_t``.

    ``supremum`` is the declared bound used in the boundedness envelope.  If
    ``antiderivative`` is given it is used for the classical capital, which
    then holds exactly; otherwise the rate is integrated by the trapezoid rule
    on the simulation grid.
    """

    rate_fn: Callable[[np.ndarray], np.ndarray]
    supremum: float
    antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    probe_horizon: float = 1000.0

    def __post_init__(self):
        if not (self.supremum >= 0 and math.isfinite(self.supremum)):
            raise DomainError(f"premium supremum must be finite, got {self.supremum}")
        self.rate(np.linspace(0.0, self.probe_horizon, 10_001))

    def rate(self, t):
        values = np.asarray(self.rate_fn(np.asarray(t, dtype=float)), dtype=float)
        if np.any(values < 0) or np.any(values > self.supremum * (1 + 1e-12)):
            raise DomainError("premium function leaves [0, supremum] on the evaluated times")
        return values

    def cumulative(self, t):
        if self.antiderivative is None:
            return None
        t = np.asarray(t, dtype=float)
        return self.antiderivative(t) - self.antiderivative(np.zeros_like(t))

    def bound(self) -> float:
        return self.supremum


PremiumSpec = Union[ConstantPremium, PremiumFunction]


def sinusoidal_premium(base: float, amplitude: float, frequency: float = 1.0) -> PremiumFunction:
    """Premium ``base * (1 + amplitude * sin(frequency * t))`` with exact antiderivative."""
    if not 0 <= amplitude <= 1:
        raise DomainError(f"amplitude must lie in [0, 1], got {amplitude}")
    if frequency <= 0:
        raise DomainError(f"frequency must be positive, got {frequency}")

    def rate(t):
        return base * (1.0 + amplitude * np.sin(frequency * t))

    def antiderivative(t):
        return base * (t - amplitude * np.cos(frequency * t) / frequency)

    return PremiumFunction(rate, base * (1.0 + amplitude), antiderivative)


# --------------------------------------------------------------------------
# risk and investment parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RiskParams:
    """Cramér-Lundberg inputs: capital, premium, claim intensity and sizes.

    ``counting`` overrides the default Poisson(lam) arrivals (renewal or a
    fixed schedule).  ``lam`` is kept as the nominal intensity either way.
    """

    u: float
    premium: PremiumSpec
    lam: float
    claims: ClaimLaw
    counting: Optional["CountingProcess"] = None

    def __post_init__(self):
        if isinstance(self.premium, (int, float)):
            object.__setattr__(self, "premium", ConstantPremium(float(self.premium)))
        if not self.u >= 0:
            raise DomainError(f"initial capital u must be >= 0, got {self.u}")
        if not self.lam > 0:
            raise DomainError(f"claim intensity must be positive, got {self.lam}")
        if not math.isfinite(self.premium.bound()):
            raise DomainError("premium bound must be finite")

    @property
    def arrivals(self) -> "CountingProcess":
        from .processes import Poisson

        return self.counting if self.counting is not None else Poisson(self.lam)

    def loading(self) -> float:
        """Safety loading for a constant premium."""
        if not isinstance(self.premium, ConstantPremium):
            raise DomainError("safety loading is defined for a constant premium only")
        return safety_loading(self.premium.c, self.lam, self.claims.mean())


class Regime(enum.Enum):
    CERTAIN = "certain"
    BOUNDARY = "boundary"
    UNCERTAIN = "uncertain"


def _classify(alpha: float, scale: float = 0.0) -> Regime:
    """Sign of alpha; within a few ulps of ``scale`` counts as the boundary."""
    if abs(alpha) <= 4 * np.finfo(float).eps * scale or alpha == 0:
        return Regime.BOUNDARY
    return Regime.CERTAIN if alpha < 0 else Regime.UNCERTAIN


@dataclass(frozen=True)
class GBM:
    """Geometric Brownian investment: dS = a S dt + sigma S dB."""

    a: float
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def alpha(self) -> float:
        return gbm_exponent(self.a, self.sigma)

    @property
    def jumps(self):
        return None

    def growth_rate(self) -> float:
        return self.a

    def regime(self) -> Regime:
        # a and sigma^2/2 may cancel exactly in theory but not in floating point
        return _classify(self.alpha, max(abs(self.a), 0.5 * self.sigma**2))


@dataclass(frozen=True)
class ExpLevy:
    """Investment index ``exp(sigma * L_t + alpha * t)``.

    ``L`` is a standard Brownian motion plus the compensated compound Poisson
    process described by ``jumps``, so that E[L_t] = 0.
    """

    sigma: float
    alpha: float
    jumps: "LevyJumpSpec"

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")

    def growth_rate(self) -> float:
        """Drift of the continuous part of dS/S (Ito correction included)."""
        return self.alpha + 0.5 * self.sigma**2

    def regime(self) -> Regime:
        return _classify(self.alpha)


InvestmentModel = Union[GBM, ExpLevy]


def deterministic_interest(a: float) -> GBM:
    """Deterministic force of interest ``a``; identical to ``GBM(a, 0)``."""
    return GBM(a, 0.0)


def certain_ruin_regime(inv: InvestmentModel) -> Regime:
    return inv.regime()


@dataclass(frozen=True)
class HyperbolicPoint:
    """Element (x, y) of the affine group R x R+ (real hyperbolic space).

    Fields may be numpy arrays for vectorised group arithmetic.
    """

    x: float
    y: float

    def __post_init__(self):
        if not np.all(np.asarray(self.y) > 0):
            raise DomainError("hyperbolic point needs y > 0")

    def __mul__(self, other: "HyperbolicPoint") -> "HyperbolicPoint":
        return hyperbolic_mul(self, other)

    def inverse(self) -> "HyperbolicPoint":
        return HyperbolicPoint(-self.x / self.y, 1.0 / self.y)

    @staticmethod
    def identity() -> "HyperbolicPoint":
        return HyperbolicPoint(0.0, 1.0)


# --------------------------------------------------------------------------
# scalar formulas
# --------------------------------------------------------------------------


def safety_loading(c: float, lam: float, mu: float) -> float:
    """Relative premium margin rho = (c - lam*mu) / (lam*mu)."""
    expected = lam * mu
    if not expected > 0:
        raise DomainError(f"lam * mu must be positive, got {expected}")
    return (c - expected) / expected


def premium_from_loading(rho: float, lam: float, mu: float) -> float:
    return (1.0 + rho) * lam * mu


def diffusion_limit_ruin(rho: float, mu: float, m: float, u: float) -> float:
    """Ruin probability of the diffusion approximation, exp(-2 rho mu u / m)."""
    if not m > 0:
        raise DomainError(f"second moment m must be positive, got {m}")
    if rho < 0:
        raise DomainError("negative loading: ruin is certain and the formula does not apply")
    if u < 0:
        raise DomainError(f"u must be >= 0, got {u}")
    return math.exp(-2.0 * rho * mu * u / m)


def gbm_exponent(a: float, sigma: float) -> float:
    """alpha = a - sigma**2 / 2, the pathwise growth exponent of the GBM."""
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    return a - 0.5 * sigma**2


def hyperbolic_mul(p: HyperbolicPoint, q: HyperbolicPoint) -> HyperbolicPoint:
    """Group law (x, y)(x', y') = (x + x' y, y y')."""
    return HyperbolicPoint(p.x + q.x * p.y, p.y * q.y)
