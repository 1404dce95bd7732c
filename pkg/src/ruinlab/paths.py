"""Joint trajectories of the classical capital and the invested capital.

Three constructions of the invested capital X' are available:

``Scheme.EXACT``
    The closed-form solution of the investment SDE
    ``dX' = X' dS/S + dX``, i.e.
    ``X'_t = e^{Z_t} (u + int_0^t e^{-Z_s} dX_s)`` with ``Z = log S``.
    Ruin happens exactly when the discounted capital
    ``D_t = u + int e^{-Z} dX`` drops to zero, so it is detected at claim
    instants without discretisation bias.  This is the default.
``Scheme.DILATION``
    ``X'_t = e^{Z_t} u + int_0^t e^{Z_s} dX_s``: capital flows dilated by the
    investment index.  At every fixed t it has the same law as the SDE
    solution (time reversal of the Brownian increments), but the two differ
    as processes.  Along a path the claim weights e^{Z_s} vanish when Z
    drifts to -inf, so ruin is not certain under this form.
``Scheme.EULER``
    Euler-Maruyama for the SDE on the same grid, kept as a cross-check.

The grid holds the base nodes ``k * dt``, every claim time and every
investment jump time (a jump time appears twice: left limit, then value).
Each interval is then bisected ``refine`` times.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .io import write_csv
from .model import ConstantPremium, Exponential, ExpLevy, InvestmentModel, RiskParams
from .processes import (
    DeterministicSchedule,
    SeedSpec,
    Substream,
    bisect_path,
    bridge_fill,
    sample_arrivals,
    sample_claims,
    sample_jumps,
)


class Scheme(str, enum.Enum):
    EXACT = "exact"
    DILATION = "dilation"
    EULER = "euler"


@dataclass(frozen=True)
class SchemeConfig:
    dt: float = 0.01
    scheme: Scheme = Scheme.EXACT
    quadrature: str = "trapezoid"
    refine: int = 0
    block_steps: int = 4096

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError(f"step size dt must be positive, got {self.dt}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.quadrature not in ("trapezoid", "left"):
            raise DomainError(f"quadrature must be 'trapezoid' or 'left', got {self.quadrature!r}")
        if self.refine < 0:
            raise DomainError("refine must be >= 0")
        if self.block_steps < 1:
            raise DomainError("block_steps must be >= 1")


@dataclass(frozen=True)
class SimulatedPath:
    t: np.ndarray
    env: np.ndarray  # Z_t = sigma * B_t + alpha * t (or the Lévy analogue)
    is_claim: np.ndarray
    claim_times: np.ndarray
    claim_sizes: np.ndarray
    X: np.ndarray
    Xp: np.ndarray
    premium_value: np.ndarray  # premium contribution to Xp at each node
    kernel_value: np.ndarray  # the same with the premium rate replaced by 1
    ruined_at: Optional[float]
    scheme: Scheme
    u: float
    end: float  # last simulated time (< horizon if stopped at ruin)


def _ruined(value, is_claim):
    # zero capital without a claim (u = 0, c = 0) is not ruin
    return (value < 0) | ((value <= 0) & is_claim)


class _PathBuilder:
    def __init__(self, params: RiskParams, inv: Optional[InvestmentModel], cfg: SchemeConfig, horizon: float,
                 stream: SeedSpec, claim_sizes=None):
        self.params, self.cfg, self.horizon = params, cfg, horizon
        self.u = float(params.u)
        self.premium = params.premium

        self.claim_times = sample_arrivals(params.arrivals, horizon, stream)
        if claim_sizes is None:
            self.claim_sizes = sample_claims(params.claims, self.claim_times.size, stream)
        else:
            sizes = np.asarray(claim_sizes, dtype=float)
            if sizes.shape != self.claim_times.shape:
                raise DomainError(f"expected {self.claim_times.size} claim sizes, got {sizes.size}")
            if np.any(sizes < 0):
                raise DomainError("claim sizes must be non-negative")
            self.claim_sizes = sizes
        active = self.claim_sizes != 0
        self.ev_claim_t = self.claim_times[active]
        self.ev_claim_y = self.claim_sizes[active]

        if inv is None:
            self.sigma, self.alpha, self.kappa = 0.0, 0.0, 0.0
        else:
            self.sigma, self.alpha = float(inv.sigma), float(inv.alpha)
            self.kappa = 0.0
        self.jump_t = np.empty(0)
        self.jump_cum = np.zeros(1)
        self.levy = isinstance(inv, ExpLevy) and inv.jumps.intensity > 0
        if self.levy:
            self.kappa = inv.jumps.compensation
            self.jump_t, sizes = sample_jumps(inv.jumps, horizon, stream)
            self.jump_cum = np.concatenate(([0.0], np.cumsum(sizes)))

        self.rng_b = stream.generator(Substream.BROWNIAN)
        self.rng_bridge = stream.generator(Substream.BRIDGE)
        self.rng_ref = [stream.generator(Substream.REFINE + lvl) for lvl in range(cfg.refine)]
        self.n_base = max(1, math.ceil(horizon / cfg.dt - 1e-9))

        # carried state at the last node
        self.t_last, self.w_last, self.z_last = 0.0, 0.0, 0.0
        self.c_last = float(self.premium.rate(np.array([0.0]))[0])
        self.cumP = self.cumK = self.cumC = 0.0
        self.cumP1 = self.cumY = 0.0
        self.xe = self.u

    def _z(self, t, w, left_limit):
        if not self.levy:
            return self.sigma * w + self.alpha * t
        post = self.jump_cum[np.searchsorted(self.jump_t, t, side="right")]
        pre = self.jump_cum[np.searchsorted(self.jump_t, t, side="left")]
        jumps = np.where(left_limit, pre, post)
        return self.sigma * (w + jumps - self.kappa * t) + self.alpha * t

    def block(self, k0: int, k1: int) -> dict:
        cfg = self.cfg
        tb = np.arange(k0, k1 + 1) * cfg.dt
        tb[0] = self.t_last
        if k1 == self.n_base:
            tb[-1] = self.horizon
        dw = np.sqrt(np.diff(tb)) * self.rng_b.standard_normal(k1 - k0)
        wb = np.concatenate(([self.w_last], self.w_last + np.cumsum(dw)))

        lo, hi = tb[0], tb[-1]
        c_sel = (self.ev_claim_t > lo) & (self.ev_claim_t <= hi)
        ct, cy = self.ev_claim_t[c_sel], self.ev_claim_y[c_sel]
        j_sel = (self.jump_t > lo) & (self.jump_t <= hi)
        jt = self.jump_t[j_sel]
        ev = np.union1d(ct, jt)
        ins = ev[~np.isin(ev, tb)]
        w_ins = bridge_fill(tb, wb, ins, self.rng_bridge.standard_normal(ins.size))
        t = np.concatenate((tb, ins))
        w = np.concatenate((wb, w_ins))
        order = np.argsort(t, kind="stable")
        t, w = t[order], w[order]
        for rng in self.rng_ref:
            t, w = bisect_path(t, w, rng.standard_normal(t.size - 1))

        left_limit = np.zeros(t.size, dtype=bool)
        if jt.size:
            pos = np.searchsorted(t, jt)
            t = np.insert(t, pos, jt)
            w = np.insert(w, pos, w[pos])
            left_limit = np.insert(left_limit, pos, True)

        z = self._z(t, w, left_limit)
        z[0] = self.z_last
        claim_amount = np.zeros(t.size)
        if ct.size:
            np.add.at(claim_amount, np.searchsorted(t, ct, side="right") - 1, cy)
        is_claim = claim_amount > 0

        c = self.premium.rate(t)
        c[0] = self.c_last
        dt = np.diff(t)
        trapezoid = cfg.quadrature == "trapezoid"

        # classical capital
        cum_fn = getattr(self.premium, "cumulative", None)
        exact_premium = cum_fn(t[1:]) if not isinstance(self.premium, ConstantPremium) else None
        if exact_premium is None:
            inc1 = 0.5 * (c[:-1] + c[1:]) * dt
            cumP1 = self.cumP1 + np.cumsum(inc1)
        else:
            cumP1 = exact_premium
        cumY = self.cumY + np.cumsum(claim_amount[1:])
        X = (self.u + cumP1) - cumY

        out = {"t": t[1:], "env": z[1:], "is_claim": is_claim[1:], "X": X}
        scheme = cfg.scheme
        if scheme is Scheme.EULER:
            growth = np.where(dt > 0, np.diff(z) + 0.5 * self.sigma**2 * dt, np.expm1(np.diff(z)))
            drive = c[:-1] * dt - claim_amount[1:]
            xs = np.empty(dt.size)
            x = self.xe
            for i, (g, b) in enumerate(zip(growth.tolist(), drive.tolist())):
                x = x * (1.0 + g) + b
                xs[i] = x
            self.xe = x
            out["Xp"] = xs
            out["premium_value"] = np.full(dt.size, np.nan)
            out["kernel_value"] = np.full(dt.size, np.nan)
            out["ruin_value"] = xs
        else:
            g = np.exp(-z) if scheme is Scheme.EXACT else np.exp(z)
            gc = g * c
            if trapezoid:
                incP = 0.5 * (gc[:-1] + gc[1:]) * dt
                incK = 0.5 * (g[:-1] + g[1:]) * dt
            else:
                incP = gc[:-1] * dt
                incK = g[:-1] * dt
            cumP = self.cumP + np.cumsum(incP)
            cumK = self.cumK + np.cumsum(incK)
            cumC = self.cumC + np.cumsum(claim_amount[1:] * g[1:])
            e = np.exp(z[1:])
            if scheme is Scheme.EXACT:
                d = (self.u + cumP) - cumC
                out["Xp"] = e * d
                out["premium_value"] = e * cumP
                out["kernel_value"] = e * cumK
                out["ruin_value"] = d
            else:
                out["Xp"] = (e * self.u + cumP) - cumC
                out["premium_value"] = cumP
                out["kernel_value"] = cumK
                out["ruin_value"] = out["Xp"]
            self.cumP, self.cumK, self.cumC = cumP[-1], cumK[-1], cumC[-1]

        self.t_last, self.w_last, self.z_last, self.c_last = t[-1], w[-1], z[-1], c[-1]
        self.cumP1, self.cumY = float(cumP1[-1]), float(cumY[-1])
        return out


def simulate_invested(
    params: RiskParams,
    inv: Optional[InvestmentModel],
    cfg: SchemeConfig,
    horizon: float,
    stream: SeedSpec,
    stop_at_ruin: bool = False,
    claim_sizes=None,
) -> SimulatedPath:
    """Simulate classical and invested capital on one path.

    ``inv=None`` means no investment (Z = 0).  With ``stop_at_ruin`` the
    simulation ends with the block in which ruin occurs; the returned path is
    then a prefix of the full one.  ``claim_sizes`` replaces sampled sizes
    (useful with a deterministic schedule).
    """
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    b = _PathBuilder(params, inv, cfg, horizon, stream, claim_sizes)
    u = b.u
    pieces = {k: [np.array([v])] for k, v in
              dict(t=0.0, env=0.0, is_claim=False, X=u, Xp=u, premium_value=0.0, kernel_value=0.0).items()}
    if cfg.scheme is Scheme.EULER:
        pieces["premium_value"] = [np.array([np.nan])]
        pieces["kernel_value"] = [np.array([np.nan])]
    ruined_at = None
    k0 = 0
    while k0 < b.n_base:
        k1 = min(k0 + cfg.block_steps, b.n_base)
        out = b.block(k0, k1)
        for key in pieces:
            pieces[key].append(out[key])
        if ruined_at is None:
            hit = np.flatnonzero(_ruined(out["ruin_value"], out["is_claim"]))
            if hit.size:
                ruined_at = float(out["t"][hit[0]])
                if stop_at_ruin:
                    break
        k0 = k1
    arrays = {k: np.concatenate(v) for k, v in pieces.items()}
    end = float(arrays["t"][-1])
    keep = b.claim_times <= end
    return SimulatedPath(
        t=arrays["t"], env=arrays["env"], is_claim=arrays["is_claim"],
        claim_times=b.claim_times[keep], claim_sizes=b.claim_sizes[keep],
        X=arrays["X"], Xp=arrays["Xp"], premium_value=arrays["premium_value"],
        kernel_value=arrays["kernel_value"], ruined_at=ruined_at, scheme=cfg.scheme, u=u, end=end,
    )


def simulate_classical(params: RiskParams, horizon: float, stream: SeedSpec, claim_sizes=None) -> SimulatedPath:
    """Classical capital u + int c - sum Y, evaluated at 0, each claim and the horizon.

    Between claims the capital only grows, so ruin is checked at claim instants.
    """
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    times = sample_arrivals(params.arrivals, horizon, stream)
    if claim_sizes is None:
        sizes = sample_claims(params.claims, times.size, stream)
    else:
        sizes = np.asarray(claim_sizes, dtype=float)
        if sizes.shape != times.shape:
            raise DomainError(f"expected {times.size} claim sizes, got {sizes.size}")
    t = np.concatenate(([0.0], times, [horizon]))
    if t[-2] == horizon:
        t = t[:-1]
    premium = _premium_cumulative(params.premium, t)
    claims = np.zeros(t.size)
    claims[1:1 + times.size] = sizes
    is_claim = np.zeros(t.size, dtype=bool)
    is_claim[1:1 + times.size] = sizes > 0
    X = (params.u + premium) - np.cumsum(claims)
    hit = np.flatnonzero(_ruined(X, is_claim))
    ruined_at = float(t[hit[0]]) if hit.size else None
    zeros = np.zeros(t.size)
    return SimulatedPath(
        t=t, env=zeros, is_claim=is_claim, claim_times=times, claim_sizes=sizes, X=X, Xp=X.copy(),
        premium_value=premium, kernel_value=t.copy(), ruined_at=ruined_at, scheme=Scheme.EXACT,
        u=float(params.u), end=float(t[-1]),
    )


def _premium_cumulative(premium, t):
    if isinstance(premium, ConstantPremium):
        return premium.cumulative(t)
    exact = premium.cumulative(t)
    if exact is not None:
        return exact
    pieces = [quad(lambda s: float(premium.rate(np.array([s]))[0]), a, b)[0] for a, b in zip(t[:-1], t[1:])]
    return np.concatenate(([0.0], np.cumsum(pieces)))


@dataclass(frozen=True)
class BoundednessCheck:
    holds: bool
    max_violation: float
    slack: np.ndarray  # envelope - Xp at each node
    tolerance: float


def boundedness_envelope(path: SimulatedPath, c_bar: float) -> np.ndarray:
    """Capital the path would have with no claims and premium ``c_bar``."""
    if path.scheme is Scheme.EULER:
        raise DomainError("the boundedness envelope needs an exact or dilation path")
    return np.exp(path.env) * path.u + c_bar * path.kernel_value


def check_boundedness(path: SimulatedPath, c_bar: float, tol: Optional[float] = None) -> BoundednessCheck:
    """Check X'_t <= e^{Z_t} u + c_bar * kernel_t at every node.

    The default tolerance is ``1e-6 * (u + c_bar * end)``, the rounding and
    quadrature allowance for the comparison.
    """
    if c_bar < 0:
        raise DomainError("premium bound must be non-negative")
    envelope = boundedness_envelope(path, c_bar)
    slack = envelope - path.Xp
    if tol is None:
        tol = 1e-6 * (path.u + c_bar * path.end)
    worst = float(max(0.0, -slack.min()))
    return BoundednessCheck(worst <= tol, worst, slack, tol)


@dataclass(frozen=True)
class EnvelopeStats:
    supremum: float
    terminal_dilation: float  # e^{Z_T} u


def envelope_supremum(
    inv: InvestmentModel,
    c_bar: float,
    horizon: float,
    stream: SeedSpec,
    u: float = 1.0,
    cfg: SchemeConfig = SchemeConfig(scheme=Scheme.DILATION),
) -> EnvelopeStats:
    """Running supremum of the claim-free envelope and the terminal dilation term.

    With the default dilation form the envelope is
    ``e^{Z_t} u + c_bar * int_0^t e^{Z_s} ds``; for alpha < 0 the integral
    converges and ``e^{Z_T} u -> 0``.  The investment path is the one a ruin
    simulation with the same stream would see.
    """
    params = RiskParams(u, ConstantPremium(c_bar), 1.0, Exponential(1.0), DeterministicSchedule([]))
    path = simulate_invested(params, inv, cfg, horizon, stream)
    return EnvelopeStats(float(path.Xp.max()), float(np.exp(path.env[-1]) * u))


def write_path_csv(path: SimulatedPath, run_dir, index: int) -> Path:
    """Dump one path as ``path_<index>.csv`` with columns t, env, X, Xp, is_claim."""
    rows = zip(path.t, path.env, path.X, path.Xp, path.is_claim)
    return write_csv(Path(run_dir) / f"path_{index:06d}.csv", ["t", "env", "X", "Xp", "is_claim"], rows)
