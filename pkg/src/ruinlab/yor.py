"""Conditional law of the exponential functional of Brownian motion.

For a standard Brownian motion B and ``A_t = int_0^t exp(2 B_s) ds``::

    P(A_t in du, B_t in dx) = (1/u) exp(-(1 + e^{2x}) / (2u)) Theta(e^x / u, t) du dx

    Theta(r, t) = r e^{pi^2/(2t)} / sqrt(2 pi^3 t)
                  * int_0^inf exp(-y^2/(2t)) exp(-r cosh y) sinh y sin(pi y / t) dy

and ``a_t(x, u)`` is the joint density divided by the N(0, t) density of B_t.

The Theta integral is summed over the half-periods [k t, (k+1) t] of the
sine.  The terms decay like a Gaussian in k, so direct summation is exact
to rounding once the Gaussian envelope drops below 1e-20 of the scale of
the result.  Internally Theta is carried as ``Theta * e^r``, which keeps
the large-r regime free of underflow.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import ndtr

from .errors import AccuracyError, DomainError, SmallTimeRefusal
from .io import write_csv, write_grid_binary
from .processes import SeedSpec, Substream

T_MIN = 0.25
_GL_X, _GL_W = leggauss(32)
_LOG_CUT = 46.0  # envelope cut-off, ~1e-20 relative
_EPS = np.finfo(float).eps
_MAX_BLOCK = 2_000_000


@dataclass(frozen=True)
class ThetaEval:
    r: float
    t: float
    value: float
    error: float
    tail_bound: float
    method: str = "oscillatory-subdivision"


def _check_t(t: float, t_min: float) -> None:
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if t < t_min:
        raise SmallTimeRefusal(
            f"Theta refused for t={t:g} < t_min={t_min:g}: the oscillatory integral cancels to "
            "noise in double precision; use the Monte Carlo oracle (mc_oracle_joint) instead"
        )


def _panels(r: float, t: float) -> tuple[int, int, float]:
    """(half-periods K, subpanels per half-period m, y cut-off)."""
    y_gauss = t + math.sqrt(2 * t * _LOG_CUT + math.pi**2)
    budget = _LOG_CUT + math.pi**2 / (2 * t) + t / 2
    y_damp = math.acosh(1.0 + budget / r) if r > 0 else math.inf
    y_max = min(y_gauss, y_damp)
    k = max(1, math.ceil(y_max / t))
    m = int(min(64, max(1, math.ceil(t * math.sqrt(max(r, 1.0)) / 1.5))))
    return k, m, y_max


def _panel_nodes(k: int, m: int, t: float, y_max: float):
    h = t / m
    starts = np.arange(k * m) * h
    starts = starts[starts < y_max]
    y = (starts[:, None] + (_GL_X[None, :] + 1.0) * (h / 2)).ravel()
    w = np.tile(_GL_W * (h / 2), starts.size)
    return y, w


def _integrand(r: np.ndarray, y: np.ndarray, t: float) -> np.ndarray:
    # exp(-r (cosh y - 1)) with cosh y - 1 = 2 sinh^2(y/2)
    damp = 2.0 * np.sinh(0.5 * y) ** 2
    shape = np.exp(-(y * y) / (2 * t)) * np.sinh(y) * np.sin(np.pi * y / t)
    return np.exp(-r[:, None] * damp[None, :]) * shape[None, :]


def _theta_scaled(r, t: float, depth: int = 1):
    """Theta(r, t) * e^r and its error estimate, vectorised over r.

    The result uses ``2 * depth`` subdivisions per panel; the difference to
    ``depth`` subdivisions is the quadrature part of the error estimate.
    """
    r = np.asarray(r, dtype=float)
    flat = r.ravel()
    value = np.empty(flat.size)
    error = np.empty(flat.size)
    tail = np.empty(flat.size)
    keys = np.array([_panels(ri, t)[:2] for ri in flat]) if flat.size else np.empty((0, 2), int)
    pref = flat * math.exp(math.pi**2 / (2 * t)) / math.sqrt(2 * math.pi**3 * t)
    for key in {tuple(k) for k in keys.tolist()}:
        idx = np.flatnonzero((keys[:, 0] == key[0]) & (keys[:, 1] == key[1]))
        k, m = key
        y_max = max(_panels(flat[i], t)[2] for i in idx)
        y1, w1 = _panel_nodes(k, m * depth, t, y_max)
        y2, w2 = _panel_nodes(k, 2 * m * depth, t, y_max)
        step = max(1, _MAX_BLOCK // y2.size)
        for s in range(0, idx.size, step):
            sel = idx[s:s + step]
            rr = flat[sel]
            f2 = _integrand(rr, y2, t)
            i2 = f2 @ w2
            absum = np.abs(f2) @ w2
            i1 = _integrand(rr, y1, t) @ w1
            ymax_sel = np.array([_panels(ri, t)[2] for ri in rr])
            gauss_tail = 0.5 * math.exp(t / 2) * math.sqrt(2 * math.pi * t) * ndtr(-(ymax_sel - t) / math.sqrt(t))
            tb = gauss_tail * np.exp(-rr * 2.0 * np.sinh(0.5 * ymax_sel) ** 2)
            value[sel] = pref[sel] * i2
            tail[sel] = pref[sel] * tb
            error[sel] = pref[sel] * (np.abs(i2 - i1) + 64 * _EPS * absum + tb)
    return value.reshape(r.shape), error.reshape(r.shape), tail.reshape(r.shape)


def theta(r: float, t: float, *, t_min: float = T_MIN, tol: float = 1e-10, depth: int = 1) -> ThetaEval:
    """Hartman-Watson type function Theta(r, t) with an error estimate.

    Raises :class:`SmallTimeRefusal` for ``t < t_min`` and
    :class:`AccuracyError` if the truncated tail exceeds ``tol`` relative to
    the magnitude of the integrand.
    """
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    _check_t(t, t_min)
    v, e, tb = (float(a[0]) for a in _theta_scaled(np.array([r]), t, depth))
    scale = math.exp(-r)
    if tb > tol * max(abs(v), e, 1e-300):
        raise AccuracyError(f"Theta tail bound {tb:.3g} exceeds tolerance at r={r}, t={t}")
    return ThetaEval(r, t, v * scale, e * scale, tb * scale)


# --------------------------------------------------------------------------
# densities
# --------------------------------------------------------------------------


def yor_joint_density(t: float, x: float, u, *, t_min: float = T_MIN):
    """Joint density of (A_t, B_t) at (u, x) and its error estimate."""
    _check_t(t, t_min)
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise DomainError("u must be positive")
    r = math.exp(x) / u
    th, err, _ = _theta_scaled(r, t)
    # (1/u) exp(-(1 + e^{2x}) / 2u) * Theta = (1/u) exp(-(1 + e^x)^2 / 2u) * (Theta e^r)
    weight = np.exp(-((1.0 + math.exp(x)) ** 2) / (2.0 * u)) / u
    return weight * th, weight * err


def _gauss(x: float, t: float) -> float:
    return math.exp(-x * x / (2 * t)) / math.sqrt(2 * math.pi * t)


def yor_density(t: float, x: float, u, *, t_min: float = T_MIN):
    """Conditional density a_t(x, u) of A_t given B_t = x."""
    value, _ = yor_density_with_error(t, x, u, t_min=t_min)
    return value


def yor_density_with_error(t: float, x: float, u, *, t_min: float = T_MIN):
    joint, err = yor_joint_density(t, x, u, t_min=t_min)
    g = _gauss(x, t)
    out = joint / g, err / g
    if np.ndim(u) == 0:
        return float(out[0]), float(out[1])
    return out


def yor_density_scaled(sigma: float, alpha: float, t: float, x: float, u, *, t_min: float = T_MIN):
    """Density of ``int_0^t exp(2(sigma B_s + alpha s)) ds`` given ``sigma B_t + alpha t = x``.

    Brownian scaling turns the functional into ``A_{sigma^2 t} / sigma^2`` of a
    standard Brownian motion with drift alpha / sigma^2, and a drifted
    Brownian motion pinned at its endpoint is the same bridge whatever the
    drift.  Hence the density is ``sigma^2 a_{sigma^2 t}(x, sigma^2 u)`` and
    does not depend on alpha.
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    s2 = sigma * sigma
    return s2 * yor_density(s2 * t, x, s2 * np.asarray(u, dtype=float), t_min=t_min)


def bridge_mean(t: float, x: float) -> float:
    """E[A_t | B_t = x] = int_0^t exp(2 s x / t + 2 s (t - s) / t) ds."""
    val, _ = quad(lambda s: math.exp(2 * s * x / t + 2 * s * (t - s) / t), 0.0, t, epsabs=0, epsrel=1e-13)
    return val


def default_u_grid(t: float, x: float, per_decade: int = 100, below: float = 3.0, above: float = 5.0) -> np.ndarray:
    """Log-spaced u grid around the conditional mean, wide enough for the mass."""
    centre = math.log10(bridge_mean(t, x))
    n = int(round((below + above) * per_decade)) + 1
    return np.logspace(centre - below, centre + above, n)


def yor_normalization(t: float, x: float, *, tol: float = 1e-9, max_level: int = 4) -> tuple[float, float]:
    """Mass of a_t(x, .) by the trapezoid rule in log u, refined until stable.

    Returns ``(mass, error_estimate)``.
    """
    per_decade = 25
    prev = None
    for _ in range(max_level):
        u = default_u_grid(t, x, per_decade)
        mass = float(np.trapezoid(yor_density(t, x, u) * u, np.log(u)))
        if prev is not None and abs(mass - prev) < tol:
            return mass, abs(mass - prev)
        prev = mass
        per_decade *= 2
    return mass, abs(mass - prev)


@dataclass(frozen=True)
class YorDensityGrid:
    t: float
    x: np.ndarray
    u: np.ndarray  # shape (n_x, n_u): one log-spaced grid per x
    values: np.ndarray
    errors: np.ndarray
    defect: np.ndarray  # |int a du - 1| per x

    def to_csv(self, path) -> Path:
        rows = (
            (self.t, self.x[i], self.u[i, j], self.values[i, j], self.errors[i, j])
            for i in range(self.x.size)
            for j in range(self.u.shape[1])
        )
        return write_csv(path, ["t", "x", "u", "value", "err"], rows)

    def to_binary(self, path) -> Path:
        """Binary tabulation on the axes (x, column index); u itself is in the CSV."""
        cols = np.arange(self.u.shape[1], dtype=float)
        return write_grid_binary(path, [self.x, cols], self.values, self.errors)


def tabulate_yor_density(t: float, xs: Sequence[float], per_decade: int = 100) -> YorDensityGrid:
    xs = np.asarray(xs, dtype=float)
    grids, vals, errs, defects = [], [], [], []
    for x in xs:
        u = default_u_grid(t, x, per_decade)
        v, e = yor_density_with_error(t, x, u)
        grids.append(u)
        vals.append(v)
        errs.append(e)
        defects.append(abs(np.trapezoid(v * u, np.log(u)) - 1.0))
    return YorDensityGrid(t, xs, np.array(grids), np.array(vals), np.array(errs), np.array(defects))


def conditional_bin_probabilities(t: float, x_lo: float, x_hi: float, u_edges, *, order: int = 4,
                                  per_decade: int = 100) -> np.ndarray:
    """P(A_t in each u bin | B_t in [x_lo, x_hi]) from the density.

    The slab is integrated by Gauss-Legendre with weights phi(x; 0, t), so the
    result is comparable with a Monte Carlo histogram of the paths whose
    endpoint falls in the slab.
    """
    u_edges = np.asarray(u_edges, dtype=float)
    xg, wg = leggauss(order)
    xs = x_lo + (x_hi - x_lo) * (xg + 1) / 2
    ws = wg * np.array([_gauss(x, t) for x in xs])
    out = np.zeros(u_edges.size - 1)
    for x, w in zip(xs, ws):
        u = default_u_grid(t, x, per_decade)
        dens = yor_density(t, x, u) * u
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(np.log(u)))))
        with np.errstate(divide="ignore"):
            at = np.interp(np.log(np.maximum(u_edges, 1e-300)), np.log(u), cdf, left=0.0, right=cdf[-1])
        out += w * np.diff(at)
    return out / ws.sum()


# --------------------------------------------------------------------------
# Monte Carlo oracle
# --------------------------------------------------------------------------

ORACLE_CHUNK = 16384
_BLOCK_STEPS = 64


@dataclass(frozen=True)
class JointHistogram:
    """Counts of (A, Z) samples; rows index A bins, columns Z bins."""

    t: float
    counts: np.ndarray
    a_edges: np.ndarray
    x_edges: np.ndarray
    n_total: int

    def probabilities(self) -> np.ndarray:
        return self.counts / self.n_total


def _record_steps(times, dt):
    steps = []
    for t in times:
        k = round(t / dt)
        if abs(k * dt - t) > 1e-9 * max(1.0, t):
            raise DomainError(f"time {t} is not a multiple of dt={dt}")
        steps.append(k)
    return steps


def _functional_chunk(sigma, alpha, steps, dt, stream: SeedSpec, size):
    """A and Z at each record step for one chunk of paths.

    Increments are float32 within fixed blocks of 64 steps; the running
    exponent and the trapezoid sum are carried in float64.  Block boundaries
    do not depend on the record steps, so recording more times leaves the
    values at the others unchanged.
    """
    rng = stream.generator(Substream.BROWNIAN)
    scale = np.float32(2.0 * sigma * math.sqrt(dt))
    shift = np.float32(2.0 * alpha * dt)
    y = np.zeros(size)  # 2 Z
    a = np.zeros(size)
    e_prev = np.ones(size)
    rec_a = np.empty((len(steps), size))
    rec_z = np.empty((len(steps), size))
    buf = np.empty((_BLOCK_STEPS, size), dtype=np.float32)
    last = steps[-1]
    for k0 in range(0, last, _BLOCK_STEPS):
        k1 = min(k0 + _BLOCK_STEPS, last)
        blk = buf[: k1 - k0]
        rng.standard_normal(out=blk, dtype=np.float32)
        blk *= scale
        blk += shift
        np.cumsum(blk, axis=0, out=blk)
        y_end = y + blk[-1].astype(np.float64)
        inner = [(i, k - k0) for i, k in enumerate(steps) if k0 < k < k1]
        for i, j in inner:
            rec_z[i] = 0.5 * (y + blk[j - 1].astype(np.float64))
        blk += y.astype(np.float32)
        np.exp(blk, out=blk)
        for i, j in inner:
            part = 0.5 * e_prev + blk[: j - 1].sum(axis=0, dtype=np.float64) + 0.5 * blk[j - 1].astype(np.float64)
            rec_a[i] = a + dt * part
        e_last = blk[-1].astype(np.float64)
        a += dt * (0.5 * e_prev + blk[:-1].sum(axis=0, dtype=np.float64) + 0.5 * e_last)
        y, e_prev = y_end, np.exp(y_end)
        for i, k in enumerate(steps):
            if k == k1:
                rec_a[i] = a
                rec_z[i] = 0.5 * y
    return rec_a, rec_z


def _oracle_chunks(sigma, alpha, times, n_paths, dt, seed, threads, consume):
    steps = _record_steps(times, dt)
    order = np.argsort(steps)
    sorted_steps = [steps[i] for i in order]
    chunks = [(c, min(ORACLE_CHUNK, n_paths - s)) for c, s in enumerate(range(0, n_paths, ORACLE_CHUNK))]

    def run(chunk):
        c, size = chunk
        a, z = _functional_chunk(sigma, alpha, sorted_steps, dt, SeedSpec(seed, c), size)
        inv = np.argsort(order)
        return consume(a[inv], z[inv])

    if threads <= 1:
        return [run(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, chunks))


def mc_oracle_samples(sigma: float, alpha: float, t, n_paths: int, dt: float, seed: int, threads: int = 1):
    """Raw samples of (A, Z) with Z = sigma B_t + alpha t.

    ``A = int_0^t exp(2 Z_s) ds`` by the trapezoid rule on a grid of step dt.
    With a sequence of times, returns arrays of shape (len(t), n_paths).
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    parts = _oracle_chunks(sigma, alpha, times, n_paths, dt, seed, threads, lambda a, z: (a, z))
    a = np.concatenate([p[0] for p in parts], axis=1)
    z = np.concatenate([p[1] for p in parts], axis=1)
    if np.ndim(t) == 0:
        return a[0], z[0]
    return a, z


def mc_oracle_joint(
    sigma: float,
    alpha: float,
    t: Union[float, Sequence[float]],
    n_paths: int,
    dt: float,
    seed: int,
    a_edges,
    x_edges,
    threads: int = 1,
):
    """Binned empirical joint law of (A, sigma B_t + alpha t).

    ``t`` may be a sequence of times sharing one simulation; ``a_edges`` and
    ``x_edges`` are then either shared or given per time.  Chunks of
    ``ORACLE_CHUNK`` paths have their own streams, so results do not depend
    on ``threads``.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    nt = times.size

    def per_time(edges):
        edges = list(edges) if isinstance(edges, (list, tuple)) and np.ndim(edges[0]) == 1 else [edges] * nt
        return [np.asarray(e, dtype=float) for e in edges]

    ae, xe = per_time(a_edges), per_time(x_edges)

    def consume(a, z):
        return [np.histogram2d(a[i], z[i], bins=[ae[i], xe[i]])[0].astype(np.int64) for i in range(nt)]

    parts = _oracle_chunks(sigma, alpha, times, n_paths, dt, seed, threads, consume)
    hists = [
        JointHistogram(float(times[i]), sum(p[i] for p in parts), ae[i], xe[i], n_paths) for i in range(nt)
    ]
    return hists[0] if np.ndim(t) == 0 else hists
