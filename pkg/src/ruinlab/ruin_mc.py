"""Monte Carlo ruin estimators and the certain-ruin experiment harness.

Each path has its own random streams ``SeedSpec(seed, i)``; estimates are
reduced in path order, so the result is the same for any thread count and
the same seed gives common random numbers across parameter sweeps.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .io import write_csv
from .model import InvestmentModel, Regime, RiskParams, has_unbounded_support
from .paths import (
    SchemeConfig,
    check_boundedness,
    envelope_supremum,
    simulate_classical,
    simulate_invested,
)
from .processes import SeedSpec, Substream

Z95 = NormalDist().inv_cdf(0.975)


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise DomainError("need at least one trial")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    n_paths: int
    horizon: float
    seed: int

    @classmethod
    def from_count(cls, hits: int, n: int, horizon: float, seed: int) -> "MonteCarloEstimate":
        lo, hi = wilson_interval(hits, n)
        p = hits / n
        return cls(p, min(lo, p), max(hi, p), n, horizon, seed)

    @property
    def stderr(self) -> float:
        return math.sqrt(self.estimate * (1 - self.estimate) / self.n_paths)


def _map_paths(fn: Callable[[int], object], n_paths: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(n_paths)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_paths), chunksize=max(1, n_paths // (8 * threads))))


@dataclass(frozen=True)
class PathOutcome:
    ruined_at: float  # inf when the path survives the horizon
    max_violation: float  # nan unless the boundedness check ran


def simulate_outcomes(
    params: RiskParams,
    inv: Optional[InvestmentModel],
    cfg: SchemeConfig,
    horizon: float,
    n_paths: int,
    seed: int,
    threads: int = 1,
    check_envelope: bool = False,
) -> list[PathOutcome]:
    """Ruin time (and optionally the boundedness violation) of every path.

    Paths stop at ruin, so the boundedness check covers each path up to the
    end of the block in which it was ruined, or the full horizon.
    ``inv=None`` runs the classical model, checked exactly at claim instants.
    """
    c_bar = params.premium.bound()

    def one(i: int) -> PathOutcome:
        stream = SeedSpec(seed, i)
        if inv is None:
            path = simulate_classical(params, horizon, stream)
        else:
            path = simulate_invested(params, inv, cfg, horizon, stream, stop_at_ruin=True)
        ruined = path.ruined_at if path.ruined_at is not None else math.inf
        viol = math.nan
        if check_envelope and inv is not None:
            viol = check_boundedness(path, c_bar).max_violation
        return PathOutcome(ruined, viol)

    return _map_paths(one, n_paths, threads)


def estimate_ruin(
    params: RiskParams,
    inv: Optional[InvestmentModel],
    cfg: SchemeConfig,
    horizon: float,
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> MonteCarloEstimate:
    """Fraction of paths ruined by ``horizon`` with a Wilson 95% interval."""
    if n_paths < 100:
        raise DomainError(f"n_paths must be >= 100, got {n_paths}")
    outcomes = simulate_outcomes(params, inv, cfg, horizon, n_paths, seed, threads)
    hits = sum(o.ruined_at <= horizon for o in outcomes)
    return MonteCarloEstimate.from_count(hits, n_paths, horizon, seed)


@dataclass(frozen=True)
class CertainRuinReport:
    label: str
    horizons: tuple
    estimates: tuple  # MonteCarloEstimate per horizon
    regime: Regime
    envelope_median_terminal: float = math.nan  # median of e^{Z_T} u at the last horizon
    envelope_p99: tuple = ()  # 99th percentile of the envelope supremum, per envelope horizon
    envelope_horizons: tuple = ()
    max_violation: float = math.nan  # worst boundedness violation over all paths

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([e.estimate for e in self.estimates])

    def is_monotone(self) -> bool:
        """Nondecreasing in the horizon, tolerating overlap of the intervals."""
        for a, b in zip(self.estimates, self.estimates[1:]):
            if b.estimate < a.estimate and b.ci_high < a.ci_low:
                return False
        return True

    def rows(self):
        for e in self.estimates:
            yield (self.label, e.horizon, e.n_paths, e.estimate, e.ci_low, e.ci_high, self.regime.value)


REPORT_HEADER = ["variant", "horizon", "n", "ruin_freq", "ci_low", "ci_high", "regime"]


def certain_ruin_experiment(
    params: RiskParams,
    inv: InvestmentModel,
    cfg: SchemeConfig,
    horizons: Sequence[float],
    n_paths: int,
    seed: int,
    threads: int = 1,
    n_envelope: int = 0,
    check_envelope: bool = False,
    label: str = "base",
) -> CertainRuinReport:
    """Ruin frequency over a ladder of horizons from one set of paths.

    Every horizon reads the same simulated ruin times, so the frequencies are
    nondecreasing pathwise.  ``n_envelope`` paths of the claim-free envelope
    (same streams) are also summarised when the regime is certain ruin.
    """
    horizons = tuple(sorted(float(h) for h in horizons))
    if not has_unbounded_support(params.claims):
        warnings.warn("claim law has bounded support; the certain-ruin hypothesis does not hold", stacklevel=2)
    outcomes = simulate_outcomes(params, inv, cfg, horizons[-1], n_paths, seed, threads, check_envelope)
    times = np.array([o.ruined_at for o in outcomes])
    estimates = tuple(MonteCarloEstimate.from_count(int(np.sum(times <= h)), n_paths, h, seed) for h in horizons)
    regime = inv.regime()
    max_violation = float(np.nanmax([o.max_violation for o in outcomes])) if check_envelope else math.nan

    env_median, env_p99, env_h = math.nan, (), ()
    if n_envelope and regime is Regime.CERTAIN:
        env_h = tuple(sorted({horizons[-1] / 2, horizons[-1]}))
        c_bar = params.premium.bound()
        terminal, sups = [], {h: [] for h in env_h}
        for i in range(n_envelope):
            for h in env_h:
                stats = envelope_supremum(inv, c_bar, h, SeedSpec(seed, i), params.u)
                sups[h].append(stats.supremum)
                if h == env_h[-1]:
                    terminal.append(stats.terminal_dilation)
        env_median = float(np.median(terminal))
        env_p99 = tuple(float(np.quantile(sups[h], 0.99)) for h in env_h)
    return CertainRuinReport(label, horizons, estimates, regime, env_median, env_p99, env_h, max_violation)


@dataclass(frozen=True)
class Variant:
    """One row of the corollary matrix: modified risk params and/or investment."""

    label: str
    params: RiskParams
    inv: InvestmentModel


def corollary_matrix(
    variants: Sequence[Variant],
    cfg: SchemeConfig,
    horizons: Sequence[float],
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> list[CertainRuinReport]:
    return [
        certain_ruin_experiment(v.params, v.inv, cfg, horizons, n_paths, seed, threads, label=v.label)
        for v in variants
    ]


def write_report_csv(reports: Sequence[CertainRuinReport], path):
    rows = [row for r in reports for row in r.rows()]
    return write_csv(path, REPORT_HEADER, rows)


# --------------------------------------------------------------------------
# pure diffusion risk process
# --------------------------------------------------------------------------

DIFFUSION_CHUNK = 4096


def estimate_diffusion_ruin(
    rho: float,
    mu: float,
    m: float,
    u: float,
    horizon: float,
    n_paths: int,
    seed: int,
    lam: float = 1.0,
    dt: float = 1.0,
    escape_tol: float = 1e-12,
) -> MonteCarloEstimate:
    """Ruin frequency of ``u + rho*lam*mu*t - sqrt(lam*m) W_t`` before ``horizon``.

    Crossings between grid nodes are resolved exactly: given both endpoints
    positive, a Brownian bridge dips below zero with probability
    ``exp(-2 x0 x1 / (v dt))``.  A path whose capital exceeds the level where
    the remaining ruin probability ``exp(-2 drift x / v)`` falls below
    ``escape_tol`` is counted as surviving.  Streams are keyed per chunk of
    ``DIFFUSION_CHUNK`` paths.
    """
    if not (m > 0 and lam > 0 and dt > 0):
        raise DomainError("m, lam and dt must be positive")
    drift = rho * lam * mu
    var = lam * m
    escape = math.inf if drift <= 0 else -math.log(escape_tol) * var / (2 * drift)
    n_steps = math.ceil(horizon / dt - 1e-9)
    hits = 0
    for chunk, start in enumerate(range(0, n_paths, DIFFUSION_CHUNK)):
        size = min(DIFFUSION_CHUNK, n_paths - start)
        stream = SeedSpec(seed, chunk)
        rng_w = stream.generator(Substream.BROWNIAN)
        rng_c = stream.generator(Substream.BRIDGE)
        x = np.full(size, float(u))
        alive = x > 0
        ruined = ~alive
        t = 0.0
        for _ in range(n_steps):
            step = min(dt, horizon - t)
            t += step
            z = rng_w.standard_normal(size)
            v = rng_c.random(size)
            x_new = x + drift * step + math.sqrt(var * step) * z
            with np.errstate(over="ignore"):
                cross = np.exp(-2.0 * np.maximum(x, 0) * np.maximum(x_new, 0) / (var * step))
            hit = alive & ((x_new <= 0) | (v < cross))
            ruined |= hit
            alive &= ~hit & (x_new < escape)
            x = x_new
            if not alive.any():
                break
        hits += int(ruined.sum())
    return MonteCarloEstimate.from_count(hits, n_paths, horizon, seed)
