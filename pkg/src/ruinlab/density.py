"""Joint law of invested capital and investment level for the diffusion model.

The risk process is the Brownian approximation ``X_t = u + drift*t + sqrt(v) W_t``
with ``drift = rho*lam*mu`` and ``v = lam*m``.  Investing it in
``exp(Z_t)``, ``Z_t = sigma B_t + alpha t``, the invested capital at time t is,
given ``Z_t = x`` and ``A = int_0^t exp(2 Z_s) ds = y``, Gaussian:

    X'_t | (Z_t = x, A = y)  ~  Normal(u + drift*y, v*y)

so the transition density is a Gaussian mixture over the conditional law of
A given the endpoint (module :mod:`ruinlab.yor`)::

    p_t(z, x) = phi(x; alpha t, sigma^2 t) int_0^inf N(z; u + drift*y, v*y) f(y | x) dy

:class:`DensityConvention` can switch individual ingredients to alternative
readings (calendar-time mean, variance ``lam*mu*y^2`` without the factor 2,
driftless x-prefactor) to show how they fail the oracle.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import ndtr

from .errors import AccuracyError, DomainError
from .io import write_csv, write_grid_binary
from .model import GBM, ConstantPremium, RiskParams
from .processes import SeedSpec, Substream
from .yor import ORACLE_CHUNK, T_MIN, default_u_grid, yor_joint_density

TRUNCATION_TARGET = 1e-4


@dataclass(frozen=True)
class DiffusionRiskParams:
    """Diffusion risk model invested in ``exp(sigma B_t + alpha t)``.

    ``lam_mu`` (claim outflow rate lam*mu) only enters the squared variance
    variant of the kernel; it defaults to ``variance_rate``.
    """

    u: float
    drift: float
    variance_rate: float
    sigma: float
    alpha: float
    lam_mu: Optional[float] = None

    def __post_init__(self):
        if not self.variance_rate > 0:
            raise DomainError(f"variance rate must be positive, got {self.variance_rate}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.lam_mu is not None and not self.lam_mu > 0:
            raise DomainError(f"lam_mu must be positive, got {self.lam_mu}")

    @property
    def investment(self) -> GBM:
        return GBM(self.alpha + 0.5 * self.sigma**2, self.sigma)

    @classmethod
    def from_risk_params(cls, params: RiskParams, inv: GBM) -> "DiffusionRiskParams":
        """Moment matching: drift c - lam*mu = rho*lam*mu, variance rate lam*E[Y^2]."""
        if not isinstance(params.premium, ConstantPremium):
            raise DomainError("the diffusion approximation needs a constant premium")
        lam_mu = params.lam * params.claims.mean()
        m = params.claims.second_moment()
        if not math.isfinite(m):
            raise DomainError("claim law needs a finite second moment")
        return cls(params.u, params.premium.c - lam_mu, params.lam * m, inv.sigma, inv.alpha, lam_mu)

    def with_u(self, u: float) -> "DiffusionRiskParams":
        return DiffusionRiskParams(u, self.drift, self.variance_rate, self.sigma, self.alpha, self.lam_mu)


@dataclass(frozen=True)
class DensityConvention:
    """Which reading of the kernel to use.

    mean: "time_change" centres at u + drift*y, "calendar" at u + drift*t.
    variance: "time_change" uses v*y; "squared" uses lam_mu*y^2 inside
    exp(-(z - mean)^2 / (lam_mu y^2)) with the 1/sqrt(2 pi lam_mu y^2) factor,
    which carries mass 1/sqrt(2) only.
    x_drift: centre the x-prefactor at alpha*t (True) or at 0.
    """

    mean: str = "time_change"
    variance: str = "time_change"
    x_drift: bool = True

    def __post_init__(self):
        if self.mean not in ("time_change", "calendar"):
            raise DomainError(f"unknown mean convention {self.mean!r}")
        if self.variance not in ("time_change", "squared"):
            raise DomainError(f"unknown variance convention {self.variance!r}")

    @property
    def tag(self) -> str:
        return f"mean={self.mean};variance={self.variance};x_drift={int(self.x_drift)}"


DEFAULT_CONVENTION = DensityConvention()


def _kernel(params: DiffusionRiskParams, t: float, y, conv: DensityConvention):
    """(mean, variance, mass) of the Gaussian kernel in z at time-change y."""
    mean = params.u + params.drift * (y if conv.mean == "time_change" else t)
    if conv.variance == "time_change":
        return mean, params.variance_rate * y, 1.0
    lam_mu = params.lam_mu if params.lam_mu is not None else params.variance_rate
    return mean, 0.5 * lam_mu * y * y, 1.0 / math.sqrt(2.0)


# --------------------------------------------------------------------------
# Yor mixture: weights of the time change given the endpoint
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class YorMixture:
    """Discretised law of (Z_t, A) on x nodes.

    ``weight[i, j]`` approximates ``prefactor(x_i) f(y_ij | x_i) dy`` (log-u
    trapezoid) and ``error[i, j]`` its quadrature error from Theta.  With
    ``x_weights`` the sum over i is an integral over x.
    """

    x: np.ndarray
    x_weights: np.ndarray
    y: np.ndarray
    weight: np.ndarray
    error: np.ndarray
    y_defect: np.ndarray  # per x: |prefactor - sum_j weight| from y truncation and quadrature


def _conditional_weights(sigma, alpha, t, x, per_decade, x_drift):
    s2t = sigma * sigma * t
    u_std = default_u_grid(s2t, x, per_decade)
    joint, err = yor_joint_density(s2t, x, u_std)
    # joint is the density of (A_{s2t}, B_{s2t}) in standard units; A = u_std / sigma^2
    y = u_std / (sigma * sigma)
    logu = np.log(u_std)
    trap = np.empty_like(logu)
    h = np.diff(logu)
    trap[0], trap[-1] = h[0] / 2, h[-1] / 2
    trap[1:-1] = (h[:-1] + h[1:]) / 2
    jac = u_std * trap  # du_std
    # prefactor tilt: N(x; alpha t, s2t) / N(x; 0, s2t)
    tilt = math.exp(x * alpha / (sigma * sigma) - alpha * alpha * t / (2 * sigma * sigma)) if x_drift else 1.0
    w = joint * jac * tilt
    e = err * jac * tilt
    prefactor = tilt * math.exp(-x * x / (2 * s2t)) / math.sqrt(2 * math.pi * s2t)
    return y, w, e, abs(prefactor - w.sum())


def composite_gauss(lo: float, hi: float, panels: int, order: int = 8):
    xg, wg = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges)[:, None] / 2
    nodes = (edges[:-1, None] + half * (xg[None, :] + 1)).ravel()
    weights = (half * wg[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=32)
def _mixture_cached(sigma, alpha, t, x_key, w_key, per_decade, x_drift):
    xs = np.array(x_key)
    ys, ws, es, ds = [], [], [], []
    for x in xs:
        y, w, e, d = _conditional_weights(sigma, alpha, t, x, per_decade, x_drift)
        ys.append(y)
        ws.append(w)
        es.append(e)
        ds.append(d)
    return YorMixture(xs, np.array(w_key), np.array(ys), np.array(ws), np.array(es), np.array(ds))


def yor_mixture(params: DiffusionRiskParams, t: float, x_nodes, x_weights=None, per_decade: int = 60,
                conv: DensityConvention = DEFAULT_CONVENTION) -> YorMixture:
    """Mixture weights on the given x nodes; tabulated once per argument set."""
    if params.sigma**2 * t < T_MIN:
        # let the Yor module raise its documented refusal
        yor_joint_density(params.sigma**2 * t, 0.0, 1.0)
    x_nodes = np.asarray(x_nodes, dtype=float)
    x_weights = np.ones_like(x_nodes) if x_weights is None else np.asarray(x_weights, dtype=float)
    return _mixture_cached(params.sigma, params.alpha, float(t), tuple(x_nodes.tolist()),
                           tuple(x_weights.tolist()), per_decade, conv.x_drift)


def x_range(params: DiffusionRiskParams, t: float, width: float = 8.0) -> tuple[float, float]:
    s = params.sigma * math.sqrt(t)
    return params.alpha * t - width * s, params.alpha * t + width * s


def mean_functional(params: DiffusionRiskParams, t: float) -> float:
    """E[A] = int_0^t E exp(2 Z_s) ds."""
    k = 2 * (params.alpha + params.sigma**2)
    return t if k == 0 else math.expm1(k * t) / k


def z_range(params: DiffusionRiskParams, t: float, width: float = 12.0) -> tuple[float, float]:
    centre = params.u + params.drift * t
    s = math.sqrt(params.variance_rate * mean_functional(params, t))
    return centre - width * s, centre + width * s


# --------------------------------------------------------------------------
# pointwise density and grids
# --------------------------------------------------------------------------


def transition_density_with_error(params: DiffusionRiskParams, t: float, z, x: float, *,
                                  conv: DensityConvention = DEFAULT_CONVENTION, per_decade: int = 60):
    """p_t(z, x) for an array of z at one x, and an error estimate."""
    mix = yor_mixture(params, t, [x], None, per_decade, conv)
    z = np.asarray(z, dtype=float)
    y, w, e = mix.y[0], mix.weight[0], mix.error[0]
    mean, var, mass = _kernel(params, t, y, conv)
    zz = z.reshape(-1, 1)
    k = mass * np.exp(-((zz - mean) ** 2) / (2 * var)) / np.sqrt(2 * math.pi * var)
    val = k @ w
    # trapezoid error: every other node of the (odd-sized, uniform in log u) grid
    half = k[:, ::2] @ (2.0 * w[::2])
    err = np.abs(val - half) + k @ e + mix.y_defect[0] * k.max(axis=1, initial=0.0)
    return val.reshape(z.shape), err.reshape(z.shape)


def transition_density(params: DiffusionRiskParams, t: float, z, x: float, *,
                       conv: DensityConvention = DEFAULT_CONVENTION, per_decade: int = 60):
    value, _ = transition_density_with_error(params, t, z, x, conv=conv, per_decade=per_decade)
    return float(value) if np.ndim(z) == 0 else value


@dataclass(frozen=True)
class TransitionDensityGrid:
    t: float
    z: np.ndarray
    x: np.ndarray
    values: np.ndarray  # shape (len(z), len(x))
    errors: np.ndarray
    mass: float
    mass_error: float  # change against the half-resolution grid, plus pointwise errors
    convention: str

    def to_csv(self, path) -> Path:
        rows = (
            (self.t, self.z[i], self.x[j], self.values[i, j], self.errors[i, j])
            for i in range(self.z.size)
            for j in range(self.x.size)
        )
        return write_csv(path, ["t", "z", "x", "value", "err"], rows)

    def to_binary(self, path) -> Path:
        return write_grid_binary(path, [self.z, self.x], self.values, self.errors)

    def ruin_mass(self) -> tuple[float, float]:
        """Mass at z <= 0 and a discretisation error estimate.

        The last partial z-interval is closed by linear interpolation to 0;
        the error is the change against the grid with every other node.
        """
        fine = _ruin_mass(self.z, self.x, self.values)
        coarse = _ruin_mass(self.z[::2], self.x[::2], self.values[::2, ::2])
        return fine, abs(fine - coarse) + float(_trapezoid_mass(self.z, self.x, self.errors))


def _trapezoid_mass(z, x, values):
    return float(np.trapezoid(np.trapezoid(values, z, axis=0), x))


def _ruin_mass(z, x, values):
    keep = np.flatnonzero(z <= 0.0)
    if keep.size == 0:
        return 0.0
    k = keep[-1]
    col = np.trapezoid(values[: k + 1], z[: k + 1], axis=0) if k > 0 else np.zeros(x.size)
    if k + 1 < z.size and z[k] < 0:
        frac = -z[k] / (z[k + 1] - z[k])
        v0 = values[k] + frac * (values[k + 1] - values[k])
        col = col + 0.5 * (values[k] + v0) * (-z[k])
    return float(np.trapezoid(col, x))


def tabulate_transition_density(params: DiffusionRiskParams, t: float, z=None, x=None, *, nz: int = 241,
                                nx: int = 161, conv: DensityConvention = DEFAULT_CONVENTION,
                                per_decade: int = 60) -> TransitionDensityGrid:
    """Density on a (z, x) grid; defaults span the declared truncation ranges."""
    z = np.linspace(*z_range(params, t), nz) if z is None else np.asarray(z, dtype=float)
    x = np.linspace(*x_range(params, t), nx) if x is None else np.asarray(x, dtype=float)
    vals = np.empty((z.size, x.size))
    errs = np.empty_like(vals)
    for j, xj in enumerate(x):
        vals[:, j], errs[:, j] = transition_density_with_error(params, t, z, xj, conv=conv, per_decade=per_decade)
    mass = _trapezoid_mass(z, x, vals)
    mass_err = abs(mass - _trapezoid_mass(z[::2], x[::2], vals[::2, ::2])) + _trapezoid_mass(z, x, errs)
    return TransitionDensityGrid(t, z, x, vals, errs, mass, mass_err, conv.tag)


# --------------------------------------------------------------------------
# integrated quantities
# --------------------------------------------------------------------------


def _x_quadrature(params, t, panels, order=8):
    lo, hi = x_range(params, t)
    return composite_gauss(lo, hi, panels, order)


def _kernel_cdf(params, t, y, conv, z):
    mean, var, mass = _kernel(params, t, y, conv)
    return mass * ndtr((z - mean) / np.sqrt(var))


@dataclass(frozen=True)
class RuinAtTime:
    t: float
    u: float
    probability: float
    error_budget: float
    truncation: float
    convention: str


def _x_tail(params, t, conv):
    lo, hi = x_range(params, t)
    centre = params.alpha * t if conv.x_drift else 0.0
    s = params.sigma * math.sqrt(t)
    return float(ndtr((lo - centre) / s) + ndtr(-(hi - centre) / s))


def ruin_probability_at(params: DiffusionRiskParams, t: float, *, conv: DensityConvention = DEFAULT_CONVENTION,
                        panels: int = 16, per_decade: int = 60) -> RuinAtTime:
    """P(X'_t <= 0): the z-integral is done in closed form, x and y by quadrature.

    The error budget adds the x-truncation tail, the y-truncation defect, the
    Theta error and the change against a half-resolution x rule.
    """
    def at(n):
        xs, wx = _x_quadrature(params, t, n)
        mix = yor_mixture(params, t, xs, wx, per_decade, conv)
        cdf = _kernel_cdf(params, t, mix.y, conv, 0.0)
        p = float(np.sum(mix.x_weights[:, None] * mix.weight * cdf))
        err = float(np.sum(mix.x_weights[:, None] * mix.error) + np.sum(mix.x_weights * mix.y_defect))
        return p, err

    p, err = at(panels)
    p_half, _ = at(panels // 2)
    tail = _x_tail(params, t, conv)
    budget = err + abs(p - p_half) + tail
    if tail + err > TRUNCATION_TARGET:
        raise AccuracyError(f"truncation budget {tail + err:.3g} exceeds {TRUNCATION_TARGET:g}")
    return RuinAtTime(t, params.u, min(1.0, max(0.0, p)), budget, tail, conv.tag)


def cell_probabilities(params: DiffusionRiskParams, t: float, z_edges, x_edges, *,
                       conv: DensityConvention = DEFAULT_CONVENTION, order: int = 8,
                       per_decade: int = 60) -> np.ndarray:
    """Probability of each (z, x) cell, shape (len(z_edges)-1, len(x_edges)-1).

    Gauss-Legendre in x within each bin and exact Gaussian cdf differences in z.
    """
    z_edges = np.asarray(z_edges, dtype=float)
    x_edges = np.asarray(x_edges, dtype=float)
    xg, wg = leggauss(order)
    out = np.empty((z_edges.size - 1, x_edges.size - 1))
    for j in range(x_edges.size - 1):
        a, b = x_edges[j], x_edges[j + 1]
        xs = a + (b - a) * (xg + 1) / 2
        mix = yor_mixture(params, t, xs, wg * (b - a) / 2, per_decade, conv)
        cdf = np.stack([_kernel_cdf(params, t, mix.y, conv, z) for z in z_edges])  # (nz+1, nx, ny)
        w = mix.x_weights[:, None] * mix.weight
        out[:, j] = np.einsum("kij,ij->k", np.diff(cdf, axis=0), w)
    return out


def density_cf(params: DiffusionRiskParams, t: float, xi, zeta, *, conv: DensityConvention = DEFAULT_CONVENTION,
               panels: int = 64, per_decade: int = 60) -> np.ndarray:
    """E exp(i (xi X'_t + zeta e^{Z_t})) from the density; shape (len(xi), len(zeta)).

    The z-integral of the Gaussian kernel is done in closed form.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    xs, wx = _x_quadrature(params, t, panels)
    mix = yor_mixture(params, t, xs, wx, per_decade, conv)
    mean, var, mass = _kernel(params, t, mix.y, conv)
    w = mix.x_weights[:, None] * mix.weight * mass
    out = np.empty((xi.size, zeta.size), dtype=complex)
    for a, s in enumerate(xi):
        risk = (w * np.exp(1j * s * mean - 0.5 * s * s * var)).sum(axis=1)  # per x node
        out[a] = np.exp(1j * np.outer(zeta, np.exp(xs))) @ risk
    return out


def lognormal_cf(params: DiffusionRiskParams, t: float, zeta: float) -> complex:
    """E exp(i zeta e^{Z_t}) by adaptive quadrature, independent of the mixture."""
    s = params.sigma * math.sqrt(t)
    mu = params.alpha * t
    lo, hi = mu - 8 * s, mu + 8 * s

    def dens(x):
        return math.exp(-((x - mu) ** 2) / (2 * s * s)) / (s * math.sqrt(2 * math.pi))

    re, _ = quad(lambda x: math.cos(zeta * math.exp(x)) * dens(x), lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)
    im, _ = quad(lambda x: math.sin(zeta * math.exp(x)) * dens(x), lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)
    return complex(re, im)


# --------------------------------------------------------------------------
# Monte Carlo oracle
# --------------------------------------------------------------------------

REPRESENTATIONS = ("time_change", "stochastic_integral", "dilation")
_BLOCK = 64


def _density_chunk(params: DiffusionRiskParams, t, dt, representation, stream: SeedSpec, size):
    n_steps = round(t / dt)
    rng_b = stream.generator(Substream.BROWNIAN)
    rng_w = stream.generator(Substream.RISK)
    s, al = params.sigma, params.alpha
    inc_scale = np.float32(s * math.sqrt(dt))
    inc_shift = np.float32(al * dt)
    sq = np.float32(math.sqrt(dt))
    z = np.zeros(size)
    a2 = np.zeros(size)  # int exp(2Z) ds
    a1 = np.zeros(size)  # int exp(Z) ds
    ito = np.zeros(size)  # int exp(Z) dW, left point
    e_prev = np.ones(size)
    buf = np.empty((_BLOCK, size), dtype=np.float32)
    dw = np.empty((_BLOCK, size), dtype=np.float32)
    need_w = representation != "time_change"
    for k0 in range(0, n_steps, _BLOCK):
        nb = min(_BLOCK, n_steps - k0)
        blk = buf[:nb]
        rng_b.standard_normal(out=blk, dtype=np.float32)
        blk *= inc_scale
        blk += inc_shift
        np.cumsum(blk, axis=0, out=blk)
        z_end = z + blk[-1].astype(np.float64)
        blk += z.astype(np.float32)
        np.exp(blk, out=blk)  # exp(Z) at the block's right nodes
        e_last = blk[-1].astype(np.float64)
        if need_w:
            wb = dw[:nb]
            rng_w.standard_normal(out=wb, dtype=np.float32)
            wb *= sq
            ito += e_prev * wb[0] + np.einsum("ij,ij->j", blk[:-1], wb[1:], dtype=np.float64)
            a1 += dt * (0.5 * e_prev + blk[:-1].sum(axis=0, dtype=np.float64) + 0.5 * e_last)
        sq_blk = blk * blk
        a2 += dt * (0.5 * e_prev**2 + sq_blk[:-1].sum(axis=0, dtype=np.float64) + 0.5 * e_last**2)
        z, e_prev = z_end, np.exp(z_end)
    u, d, v = params.u, params.drift, params.variance_rate
    if representation == "time_change":
        xp = u + d * a2 + np.sqrt(v * a2) * rng_w.standard_normal(size)
    elif representation == "stochastic_integral":
        xp = u + d * a2 + math.sqrt(v) * ito
    else:
        xp = np.exp(z) * u + d * a1 + math.sqrt(v) * ito
    return xp, z


@dataclass(frozen=True)
class DensitySamples:
    """Simulated (X'_t, Z_t) pairs."""

    t: float
    representation: str
    z: np.ndarray  # invested capital X'_t
    x: np.ndarray  # log investment level Z_t

    def histogram(self, z_edges, x_edges) -> np.ndarray:
        """Cell probabilities over the edges (fraction of all samples)."""
        counts, _, _ = np.histogram2d(self.z, self.x, bins=[z_edges, x_edges])
        return counts / self.z.size

    def ruin_fraction(self) -> float:
        return float(np.mean(self.z <= 0))

    def cf(self, xi, zeta) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        ex = np.exp(self.x)
        out = np.empty((xi.size, zeta.size), dtype=complex)
        for a, s in enumerate(xi):
            for b, q in enumerate(zeta):
                out[a, b] = np.mean(np.exp(1j * (s * self.z + q * ex)))
        return out


def mc_density_oracle(params: DiffusionRiskParams, t: float, n_paths: int, dt: float, seed: int,
                      representation: str = "time_change", threads: int = 1) -> DensitySamples:
    """Simulate (X'_t, Z_t) on a grid of step dt.

    time_change:          u + drift*A + sqrt(v*A) N, A = int exp(2Z) ds
    stochastic_integral:  u + drift*A + sqrt(v) int exp(Z) dW
    dilation:             e^{Z_t} u + drift int exp(Z) ds + sqrt(v) int exp(Z) dW

    The first two have the same law; the third is the literal dilation of the
    diffusion risk process and differs from them.  Chunks of
    ``ORACLE_CHUNK`` paths have their own streams.
    """
    if representation not in REPRESENTATIONS:
        raise DomainError(f"unknown representation {representation!r}")
    k = round(t / dt)
    if k < 1 or abs(k * dt - t) > 1e-9 * max(1.0, t):
        raise DomainError(f"t={t} must be a positive multiple of dt={dt}")
    chunks = [(c, min(ORACLE_CHUNK, n_paths - s)) for c, s in enumerate(range(0, n_paths, ORACLE_CHUNK))]

    def run(chunk):
        c, size = chunk
        return _density_chunk(params, t, dt, representation, SeedSpec(seed, c), size)

    if threads <= 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    return DensitySamples(t, representation, np.concatenate([p[0] for p in parts]),
                          np.concatenate([p[1] for p in parts]))


# --------------------------------------------------------------------------
# comparisons
# --------------------------------------------------------------------------


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """TV distance of two binned laws, counting the mass outside the bins as one cell."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    return 0.5 * (np.abs(p - q).sum() + abs((1 - p.sum()) - (1 - q.sum())))


def quantile_edges(samples: DensitySamples, bins: int = 20, lo: float = 0.005, hi: float = 0.995):
    qs = np.linspace(lo, hi, bins + 1)
    return np.quantile(samples.z, qs), np.quantile(samples.x, qs)


@dataclass(frozen=True)
class CFCheck:
    xi: np.ndarray
    zeta: np.ndarray
    analytic: np.ndarray
    empirical: np.ndarray
    lognormal: np.ndarray  # quadrature CF of e^{Z_t} on the zeta grid
    discrepancy: float


def cf_crosscheck(params: DiffusionRiskParams, t: float, xi, zeta, samples: DensitySamples, *,
                  conv: DensityConvention = DEFAULT_CONVENTION) -> CFCheck:
    """Sup over the grid of |density CF - empirical CF|."""
    xi = np.asarray(xi, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    an = density_cf(params, t, xi, zeta, conv=conv)
    em = samples.cf(xi, zeta)
    ln = np.array([lognormal_cf(params, t, q) for q in zeta])
    return CFCheck(xi, zeta, an, em, ln, float(np.max(np.abs(an - em))))


RUIN_REPORT_HEADER = ["t", "u", "sigma", "alpha", "ruin_prob", "err_budget", "mc_estimate", "mc_ci"]


def write_ruin_report(path, rows: Sequence[tuple]) -> Path:
    return write_csv(path, RUIN_REPORT_HEADER, rows)
