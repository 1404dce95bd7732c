"""Seeded random-variate generation: arrivals, claims, Brownian and Lévy paths.

Every random quantity is drawn from a substream keyed by
``(master seed, path index, purpose)``.  A path is therefore reproducible on
its own, whatever order or thread it is generated in, and two experiments that
share a seed share their random numbers (common random numbers).

Within a substream, draws are consumed in time order, so a path simulated to
a shorter horizon is a prefix of the same path simulated further.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError
from .model import ClaimLaw


class Substream(enum.IntEnum):
    ARRIVALS = 0
    CLAIMS = 1
    BROWNIAN = 2
    BRIDGE = 3
    JUMP_TIMES = 4
    JUMP_SIZES = 5
    RISK = 6
    REFINE = 16  # REFINE + level for bisection level >= 0


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus path (or chunk) index."""

    seed: int
    path: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.path < 0:
            raise DomainError(f"path index must be >= 0, got {self.path}")

    def generator(self, purpose: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.path, int(purpose)))
        return np.random.Generator(np.random.PCG64(ss))

    def with_path(self, path: int) -> "SeedSpec":
        return SeedSpec(self.seed, path)


# --------------------------------------------------------------------------
# counting processes
# --------------------------------------------------------------------------

_BATCH = 64


@dataclass(frozen=True)
class Poisson:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"Poisson rate must be positive, got {self.rate}")

    def inter_arrivals(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)


@dataclass(frozen=True)
class Renewal:
    """Renewal process whose inter-arrival times follow ``law``."""

    law: ClaimLaw

    def inter_arrivals(self, rng, size):
        return self.law.sample(rng, size)


@dataclass(frozen=True)
class DeterministicSchedule:
    times: tuple

    def __init__(self, times: Sequence[float]):
        times = tuple(float(s) for s in times)
        if any(b <= a for a, b in zip(times, times[1:])) or any(s <= 0 for s in times):
            raise DomainError("schedule times must be positive and strictly increasing")
        object.__setattr__(self, "times", times)


CountingProcess = Union[Poisson, Renewal, DeterministicSchedule]


def sample_arrivals(process: CountingProcess, horizon: float, stream: SeedSpec) -> np.ndarray:
    """Arrival times in (0, horizon], sorted."""
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if isinstance(process, DeterministicSchedule):
        times = np.asarray(process.times, dtype=float)
        return times[times <= horizon]
    rng = stream.generator(Substream.ARRIVALS)
    chunks = []
    last = 0.0
    while last <= horizon:
        block = last + np.cumsum(process.inter_arrivals(rng, _BATCH))
        chunks.append(block)
        last = block[-1]
    times = np.concatenate(chunks)
    return times[times <= horizon]


def sample_claims(law: ClaimLaw, count: int, stream: SeedSpec) -> np.ndarray:
    return law.sample(stream.generator(Substream.CLAIMS), count)


# --------------------------------------------------------------------------
# Lévy jump specification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalJump:
    """Signed Gaussian jump sizes."""

    mean_: float
    sd: float

    def mean(self) -> float:
        return self.mean_

    def sample(self, rng, size):
        return rng.normal(self.mean_, self.sd, size)


@dataclass(frozen=True)
class Negated:
    """Jumps ``-Y`` for a positive law ``Y`` (downward shocks)."""

    law: ClaimLaw

    def mean(self) -> float:
        return -self.law.mean()

    def sample(self, rng, size):
        return -self.law.sample(rng, size)


@dataclass(frozen=True)
class LevyJumpSpec:
    """Compound Poisson jumps, compensated so the jump part has mean zero.

    Only finite-mean jump laws are accepted: the strong law L_t / t -> 0
    needs E|L_1| < inf on top of E[L_1] = 0.
    """

    intensity: float
    law: Union[NormalJump, Negated, ClaimLaw]

    def __post_init__(self):
        if self.intensity < 0:
            raise DomainError(f"jump intensity must be >= 0, got {self.intensity}")
        if not math.isfinite(self.law.mean()):
            raise DomainError("jump law must have a finite mean")

    @property
    def compensation(self) -> float:
        """Drift removed per unit time: intensity * E[jump]."""
        return self.intensity * self.law.mean()


def sample_jumps(spec: LevyJumpSpec, horizon: float, stream: SeedSpec):
    """Jump times in (0, horizon] and their sizes."""
    if spec.intensity == 0:
        return np.empty(0), np.empty(0)
    rng = stream.generator(Substream.JUMP_TIMES)
    chunks = []
    last = 0.0
    while last <= horizon:
        block = last + np.cumsum(rng.exponential(1.0 / spec.intensity, _BATCH))
        chunks.append(block)
        last = block[-1]
    times = np.concatenate(chunks)
    times = times[times <= horizon]
    sizes = spec.law.sample(stream.generator(Substream.JUMP_SIZES), times.size)
    return times, sizes


# --------------------------------------------------------------------------
# Brownian grids
# --------------------------------------------------------------------------


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0:
        raise DomainError("grid must be a 1-d array starting at 0")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    return grid


def bisect_grid(grid, levels: int) -> np.ndarray:
    """Insert midpoints into every interval, ``levels`` times."""
    grid = np.asarray(grid, dtype=float)
    for _ in range(levels):
        out = np.empty(2 * grid.size - 1)
        out[0::2] = grid
        out[1::2] = 0.5 * (grid[:-1] + grid[1:])
        grid = out
    return grid


def bridge_fill(t_known, w_known, t_new, normals) -> np.ndarray:
    """Brownian-bridge values at ``t_new`` given the path at ``t_known``.

    ``t_new`` must be sorted, disjoint from ``t_known`` and inside its range.
    Several new points in one interval are filled left to right, each
    conditioned on the one before it.  ``normals`` holds one standard normal
    per new point, in time order.
    """
    t_new = np.asarray(t_new, dtype=float)
    out = np.empty(t_new.size)
    if t_new.size == 0:
        return out
    right = np.searchsorted(t_known, t_new, side="right")
    left = right - 1
    starts = np.r_[True, right[1:] != right[:-1]]
    group_start = np.maximum.accumulate(np.where(starts, np.arange(t_new.size), 0))
    rank = np.arange(t_new.size) - group_start
    rt = t_known[right]
    rw = w_known[right]
    for k in range(int(rank.max()) + 1):
        sel = np.flatnonzero(rank == k)
        if k == 0:
            lt = t_known[left[sel]]
            lw = w_known[left[sel]]
        else:
            lt = t_new[sel - 1]
            lw = out[sel - 1]
        s = t_new[sel]
        span = rt[sel] - lt
        frac = (s - lt) / span
        var = (s - lt) * (rt[sel] - s) / span
        out[sel] = lw + frac * (rw[sel] - lw) + np.sqrt(var) * normals[sel]
    return out


def bisect_path(t, w, normals):
    """One bisection level: midpoints drawn from the Brownian bridge."""
    mid_t = 0.5 * (t[:-1] + t[1:])
    half = 0.5 * np.diff(t)
    mid_w = 0.5 * (w[:-1] + w[1:]) + np.sqrt(0.5 * half) * normals
    t_out = np.empty(2 * t.size - 1)
    w_out = np.empty(2 * t.size - 1)
    t_out[0::2], t_out[1::2] = t, mid_t
    w_out[0::2], w_out[1::2] = w, mid_w
    return t_out, w_out


def _standard_brownian(grid, stream: SeedSpec, refine: int):
    rng = stream.generator(Substream.BROWNIAN)
    dw = np.sqrt(np.diff(grid)) * rng.standard_normal(grid.size - 1)
    w = np.concatenate(([0.0], np.cumsum(dw)))
    t = grid
    for level in range(refine):
        z = stream.generator(Substream.REFINE + level).standard_normal(t.size - 1)
        t, w = bisect_path(t, w, z)
    return t, w


def sample_brownian_grid(sigma: float, alpha: float, grid, stream: SeedSpec, refine: int = 0) -> np.ndarray:
    """Values of ``sigma * B_t + alpha * t`` on ``bisect_grid(grid, refine)``.

    Increments on ``grid`` come from one substream and each bisection level
    from its own, so a refined path agrees exactly with the coarse path at
    the coarse nodes.
    """
    grid = _check_grid(grid)
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    t, w = _standard_brownian(grid, stream, refine)
    return sigma * w + alpha * t


@dataclass(frozen=True)
class LevyPath:
    t: np.ndarray
    value: np.ndarray  # sigma * L_t + alpha * t, right-continuous
    jump_times: np.ndarray
    jump_sizes: np.ndarray


def sample_levy_grid(
    spec: LevyJumpSpec, sigma: float, alpha: float, grid, stream: SeedSpec, refine: int = 0
) -> LevyPath:
    """``sigma * L_t + alpha * t`` with L = B + compensated compound Poisson.

    The Brownian part uses the same substream as :func:`sample_brownian_grid`,
    so zero jump intensity reproduces it exactly.
    """
    grid = _check_grid(grid)
    t, w = _standard_brownian(grid, stream, refine)
    times, sizes = sample_jumps(spec, grid[-1], stream)
    if times.size:
        cum = np.concatenate(([0.0], np.cumsum(sizes)))
        jump_part = cum[np.searchsorted(times, t, side="right")] - spec.compensation * t
        value = sigma * (w + jump_part) + alpha * t
    else:
        value = sigma * w + alpha * t
    return LevyPath(t, value, times, sizes)
