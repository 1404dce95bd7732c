"""Command-line front end: ``ruinlab <experiment> [--config FILE] [--key value ...]``.

Every run writes into its own directory::

    manifest.ini   resolved configuration plus package versions (no timestamps)
    results.csv    the experiment's table
    checks.csv     check, value, op, tolerance, status
    summary.txt    the text printed to standard output

``ruinlab run --config DIR/manifest.ini`` repeats a run; ``ruinlab report DIR``
prints the stored summary and re-evaluates the checks.

Exit codes: 0 success, 1 failed check in ``report``, 2 invalid configuration
or missing manifest, 3 numerical accuracy failure.
"""

from __future__ import annotations

import argparse
import math
import os
import platform
import sys
from importlib import metadata
from pathlib import Path
from typing import Callable

import numpy as np
import scipy

from . import density as dens
from . import ruin_mc, yor
from .config import (
    EXPERIMENTS,
    KEYS,
    RunConfig,
    build_config,
    read_config_file,
    read_manifest_meta,
    write_manifest,
)
from .errors import AccuracyError, ConfigError, DomainError
from .io import read_csv, write_csv
from .model import GBM, ConstantPremium, ExpLevy, RiskParams, deterministic_interest, diffusion_limit_ruin, sinusoidal_premium
from .paths import SchemeConfig, simulate_invested, write_path_csv
from .processes import LevyJumpSpec, Renewal, SeedSpec

OUT_ENV = "RUINLAB_OUT"
CHECK_HEADER = ["check", "value", "op", "tolerance", "status"]


# --------------------------------------------------------------------------
# config -> model objects
# --------------------------------------------------------------------------


def risk_params(cfg: RunConfig) -> RiskParams:
    premium = ConstantPremium(cfg.premium)
    if cfg.premium_amplitude > 0:
        premium = sinusoidal_premium(cfg.premium, cfg.premium_amplitude, cfg.premium_frequency)
    return RiskParams(cfg.u, premium, cfg.lam, cfg.claims, cfg.counting)


def investment(cfg: RunConfig):
    alpha = cfg.alpha if cfg.alpha is not None else cfg.a - 0.5 * cfg.sigma**2
    if cfg.jump_intensity > 0:
        return ExpLevy(cfg.sigma, alpha, LevyJumpSpec(cfg.jump_intensity, cfg.jump_law))
    if cfg.alpha is not None:
        return GBM(cfg.alpha + 0.5 * cfg.sigma**2, cfg.sigma)
    return GBM(cfg.a, cfg.sigma)


def scheme_config(cfg: RunConfig) -> SchemeConfig:
    return SchemeConfig(cfg.dt, cfg.scheme, cfg.quadrature, cfg.refine)


def diffusion_params(cfg: RunConfig) -> dens.DiffusionRiskParams:
    drift = cfg.drift if cfg.drift is not None else cfg.rho * cfg.lam * cfg.mu
    var = cfg.variance_rate if cfg.variance_rate is not None else cfg.lam * cfg.m
    if not var > 0:
        raise ConfigError("variance_rate", f"must be positive, got {var}")
    if not cfg.sigma > 0:
        raise ConfigError("sigma", "must be positive for density experiments")
    alpha = cfg.alpha if cfg.alpha is not None else cfg.a - 0.5 * cfg.sigma**2
    return dens.DiffusionRiskParams(cfg.u, drift, var, cfg.sigma, alpha, cfg.lam * cfg.mu)


def convention(cfg: RunConfig) -> dens.DensityConvention:
    return dens.DensityConvention(cfg.conv_mean, cfg.conv_variance, cfg.conv_x_drift)


# --------------------------------------------------------------------------
# run bookkeeping
# --------------------------------------------------------------------------


class Run:
    """Collects results, checks and summary lines for one run directory."""

    def __init__(self, cfg: RunConfig, directory: Path):
        self.cfg = cfg
        self.dir = directory
        self.lines: list[str] = [f"experiment: {cfg.experiment}", f"seed: {cfg.seed}"]
        self.checks: list[tuple] = []

    def say(self, line: str) -> None:
        self.lines.append(line)

    def check(self, name: str, value: float, op: str, tol: float) -> None:
        self.checks.append((name, value, op, tol, "PASS" if evaluate(value, op, tol) else "FAIL"))

    def finish(self) -> None:
        write_csv(self.dir / "checks.csv", CHECK_HEADER, self.checks)
        for name, value, op, tol, status in self.checks:
            self.lines.append(f"{status} {name}: {value:.6g} {op} {tol:.6g}")
        text = "\n".join(self.lines) + "\n"
        (self.dir / "summary.txt").write_text(text, encoding="utf-8")
        sys.stdout.write(text)


def evaluate(value: float, op: str, tol: float) -> bool:
    if math.isnan(value):
        return False
    return {"<": value < tol, "<=": value <= tol, ">=": value >= tol, ">": value > tol}[op]


def run_directory(cfg: RunConfig) -> Path:
    if cfg.out:
        return Path(cfg.out)
    root = Path(os.environ.get(OUT_ENV, "runs"))
    return root / f"{cfg.experiment}-seed{cfg.seed}"


def manifest_meta() -> dict:
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "unknown"
    return {
        "ruinlab": version,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------


def exp_simulate(run: Run) -> None:
    cfg = run.cfg
    params, inv, sc = risk_params(cfg), investment(cfg), scheme_config(cfg)
    rows = []
    for i in range(cfg.n_paths):
        path = simulate_invested(params, inv, sc, cfg.horizon, SeedSpec(cfg.seed, i))
        write_path_csv(path, run.dir / "paths", i)
        rows.append((i, path.ruined_at if path.ruined_at is not None else math.inf, path.X[-1], path.Xp[-1]))
    write_csv(run.dir / "results.csv", ["path", "ruined_at", "X_end", "Xp_end"], rows)
    ruined = sum(math.isfinite(r[1]) for r in rows)
    run.say(f"paths: {cfg.n_paths}, ruined before {cfg.horizon:g}: {ruined}")


def exp_ruin(run: Run) -> None:
    cfg = run.cfg
    est = ruin_mc.estimate_ruin(risk_params(cfg), investment(cfg), scheme_config(cfg), cfg.horizon,
                                cfg.n_paths, cfg.seed, cfg.threads)
    write_csv(run.dir / "results.csv", ["horizon", "n", "ruin_freq", "ci_low", "ci_high"],
              [(est.horizon, est.n_paths, est.estimate, est.ci_low, est.ci_high)])
    run.say(f"ruin frequency by T={est.horizon:g}: {est.estimate:.4f} [{est.ci_low:.4f}, {est.ci_high:.4f}]")


def exp_certain_ruin(run: Run) -> None:
    cfg = run.cfg
    params, inv = risk_params(cfg), investment(cfg)
    report = ruin_mc.certain_ruin_experiment(
        params, inv, scheme_config(cfg), cfg.horizons, cfg.n_paths, cfg.seed, cfg.threads,
        n_envelope=cfg.n_envelope, check_envelope=cfg.check_envelope,
    )
    ruin_mc.write_report_csv([report], run.dir / "results.csv")
    run.say(f"regime: {report.regime.value}")
    for e in report.estimates:
        run.say(f"T={e.horizon:g}: ruin frequency {e.estimate:.4f} [{e.ci_low:.4f}, {e.ci_high:.4f}]")
    if report.envelope_p99:
        run.say(f"envelope: median e^Z_T u = {report.envelope_median_terminal:.4g}, "
                + ", ".join(f"p99 sup at T={h:g}: {p:.4g}" for h, p in zip(report.envelope_horizons, report.envelope_p99)))
    run.check("ruin_freq_final", report.estimates[-1].estimate, ">=", cfg.tol_min_ruin)
    run.check("monotone", float(report.is_monotone()), ">=", 1.0)
    if cfg.check_envelope:
        tol = 1e-6 * (params.u + params.premium.bound() * report.horizons[-1])
        run.check("boundedness_max_violation", report.max_violation, "<", tol)


def corollary_variants(cfg: RunConfig) -> list:
    base, inv = risk_params(cfg), investment(cfg)
    alpha = inv.alpha
    out = []
    for name in cfg.variants:
        if name == "sinusoidal":
            p = RiskParams(base.u, sinusoidal_premium(cfg.premium, cfg.cor_amplitude, cfg.cor_frequency),
                           base.lam, base.claims, base.counting)
            out.append(ruin_mc.Variant("bounded_premium", p, inv))
        elif name == "renewal":
            p = RiskParams(base.u, base.premium, base.lam, base.claims, Renewal(cfg.cor_interarrival))
            out.append(ruin_mc.Variant("renewal_counting", p, inv))
        elif name == "levy":
            jumps = LevyJumpSpec(cfg.cor_jump_intensity, cfg.cor_jump_law)
            out.append(ruin_mc.Variant("levy_investment", base, ExpLevy(inv.sigma, alpha, jumps)))
        elif name == "interest":
            out.append(ruin_mc.Variant("deterministic_interest", base, deterministic_interest(cfg.cor_interest)))
    return out


def exp_corollaries(run: Run) -> None:
    cfg = run.cfg
    reports = ruin_mc.corollary_matrix(corollary_variants(cfg), scheme_config(cfg), cfg.horizons,
                                       cfg.n_paths, cfg.seed, cfg.threads)
    ruin_mc.write_report_csv(reports, run.dir / "results.csv")
    for r in reports:
        freqs = ", ".join(f"{e.horizon:g}: {e.estimate:.4f}" for e in r.estimates)
        run.say(f"{r.label} ({r.regime.value}): {freqs}")
        run.check(f"{r.label}_final", r.estimates[-1].estimate, ">=", cfg.tol_corollary)


def exp_theta(run: Run) -> None:
    cfg = run.cfg
    ev = yor.theta(cfg.r, cfg.t, t_min=cfg.t_min, tol=cfg.tol)
    write_csv(run.dir / "results.csv", ["r", "t", "value", "err", "tail_bound", "method"],
              [(ev.r, ev.t, ev.value, ev.error, ev.tail_bound, ev.method)])
    run.say(f"Theta({ev.r:g}, {ev.t:g}) = {ev.value!r} +- {ev.error:.3g}")
    run.check("theta_nonneg", ev.value + ev.error, ">=", 0.0)


def exp_yor_density(run: Run) -> None:
    cfg = run.cfg
    if cfg.t < cfg.t_min:
        yor.theta(1.0, cfg.t, t_min=cfg.t_min)  # raises the refusal
    grid = yor.tabulate_yor_density(cfg.t, cfg.x_values, cfg.per_decade)
    grid.to_csv(run.dir / "yor_grid.csv")
    grid.to_binary(run.dir / "yor_grid.bin")
    rows = []
    for i, x in enumerate(grid.x):
        neg = float(np.max(-(grid.values[i] + grid.errors[i])))
        rows.append((cfg.t, x, grid.defect[i], neg))
        run.check(f"defect_x={x:g}", grid.defect[i], "<", cfg.tol_defect)
        run.check(f"negativity_x={x:g}", neg, "<=", 0.0)
    write_csv(run.dir / "results.csv", ["t", "x", "defect", "max_negative_part"], rows)
    run.say("normalization defects: " + ", ".join(f"x={x:g}: {d:.2e}" for x, d in zip(grid.x, grid.defect)))


def exp_transition_density(run: Run) -> None:
    cfg = run.cfg
    p, conv = diffusion_params(cfg), convention(cfg)
    grid = dens.tabulate_transition_density(p, cfg.t, nz=cfg.nz, nx=cfg.nx, conv=conv, per_decade=cfg.per_decade)
    grid.to_csv(run.dir / "density_grid.csv")
    grid.to_binary(run.dir / "density_grid.bin")
    ruin_mass, ruin_err = grid.ruin_mass()
    row = [cfg.t, grid.mass, grid.mass_error, ruin_mass, ruin_err, math.nan]
    run.say(f"convention: {conv.tag}")
    run.say(f"grid mass {grid.mass:.6f} (+- {grid.mass_error:.2e}), mass at z<=0 {ruin_mass:.6f}")
    run.check("mass_defect", abs(grid.mass - 1.0), "<=", cfg.tol_mass)
    if cfg.mc_paths > 0:
        samples = dens.mc_density_oracle(p, cfg.t, cfg.mc_paths, cfg.mc_dt, cfg.seed, threads=cfg.threads)
        ze, xe = dens.quantile_edges(samples, cfg.bins)
        tv = dens.total_variation(dens.cell_probabilities(p, cfg.t, ze, xe, conv=conv, per_decade=cfg.per_decade),
                                  samples.histogram(ze, xe))
        row[-1] = tv
        run.say(f"TV distance to Monte Carlo ({cfg.mc_paths} paths, {cfg.bins}x{cfg.bins} bins): {tv:.4f}")
        run.check("tv_distance", tv, "<", cfg.tol_tv)
    write_csv(run.dir / "results.csv", ["t", "mass", "mass_err", "ruin_mass", "ruin_mass_err", "tv_mc"], [row])


def exp_ruin_at_t(run: Run) -> None:
    cfg = run.cfg
    base, conv = diffusion_params(cfg), convention(cfg)
    rows = []
    for i, u in enumerate(cfg.u_values):
        p = base.with_u(u)
        res = dens.ruin_probability_at(p, cfg.t, conv=conv, per_decade=cfg.per_decade)
        mc, ci = math.nan, math.nan
        if cfg.mc_paths > 0:
            s = dens.mc_density_oracle(p, cfg.t, cfg.mc_paths, cfg.mc_dt, cfg.seed + i, threads=cfg.threads)
            mc = s.ruin_fraction()
            lo, hi = ruin_mc.wilson_interval(int(round(mc * cfg.mc_paths)), cfg.mc_paths)
            ci = (hi - lo) / 2
            se = math.sqrt(mc * (1 - mc) / cfg.mc_paths)
            run.check(f"mc_agreement_u={u:g}", abs(res.probability - mc), "<=", max(cfg.tol_abs, 3 * se))
        rows.append((cfg.t, u, p.sigma, p.alpha, res.probability, res.error_budget, mc, ci))
        run.say(f"u={u:g}: P(ruined at t={cfg.t:g}) = {res.probability:.6f} (budget {res.error_budget:.1e})"
                + (f", Monte Carlo {mc:.4f}" if cfg.mc_paths > 0 else ""))
    dens.write_ruin_report(run.dir / "results.csv", rows)


def exp_diffusion_limit(run: Run) -> None:
    cfg = run.cfg
    value = diffusion_limit_ruin(cfg.rho, cfg.mu, cfg.m, cfg.u)
    row = [cfg.rho, cfg.mu, cfg.m, cfg.u, value, math.nan, math.nan, math.nan]
    run.say(f"{value!r}")
    if cfg.mc_paths > 0:
        est = ruin_mc.estimate_diffusion_ruin(cfg.rho, cfg.mu, cfg.m, cfg.u, cfg.horizon, cfg.mc_paths,
                                              cfg.seed, lam=cfg.lam)
        row[5:] = [est.estimate, est.ci_low, est.ci_high]
        run.say(f"Monte Carlo (T={cfg.horizon:g}, n={cfg.mc_paths}): {est.estimate:.4f}")
        run.check("mc_agreement", abs(est.estimate - value), "<=", max(cfg.tol_abs, 3 * est.stderr))
    write_csv(run.dir / "results.csv", ["rho", "mu", "m", "u", "psi", "mc_estimate", "ci_low", "ci_high"], [row])


def exp_cf_check(run: Run) -> None:
    cfg = run.cfg
    p, conv = diffusion_params(cfg), convention(cfg)
    n = cfg.mc_paths if cfg.mc_paths > 0 else 100_000
    samples = dens.mc_density_oracle(p, cfg.t, n, cfg.mc_dt, cfg.seed, threads=cfg.threads)
    chk = dens.cf_crosscheck(p, cfg.t, cfg.xi_values, cfg.zeta_values, samples, conv=conv)
    rows = []
    for a, s in enumerate(chk.xi):
        for b, q in enumerate(chk.zeta):
            an, em = chk.analytic[a, b], chk.empirical[a, b]
            rows.append((s, q, an.real, an.imag, em.real, em.imag, abs(an - em)))
    write_csv(run.dir / "results.csv", ["xi", "zeta", "cf_re", "cf_im", "mc_re", "mc_im", "abs_diff"], rows)
    run.say(f"sup |density CF - empirical CF| over {chk.xi.size}x{chk.zeta.size} grid (n={n}): {chk.discrepancy:.4g}")
    run.check("cf_discrepancy", chk.discrepancy, "<", cfg.tol_cf)
    if np.any(chk.xi == 0):
        a = int(np.flatnonzero(chk.xi == 0)[0])
        gap = float(np.max(np.abs(chk.analytic[a] - chk.lognormal)))
        run.say(f"lognormal marginal: density route vs quadrature {gap:.2e}")
        run.check("lognormal_marginal", gap, "<", 1e-2)


EXPERIMENT_FUNCS: dict[str, Callable[[Run], None]] = {
    "simulate": exp_simulate,
    "ruin": exp_ruin,
    "certain-ruin": exp_certain_ruin,
    "corollaries": exp_corollaries,
    "theta": exp_theta,
    "yor-density": exp_yor_density,
    "transition-density": exp_transition_density,
    "ruin-at-t": exp_ruin_at_t,
    "diffusion-limit": exp_diffusion_limit,
    "cf-check": exp_cf_check,
}


def execute(cfg: RunConfig) -> Path:
    """Run one experiment and write its artifacts.  Returns the run directory."""
    directory = run_directory(cfg)
    directory.mkdir(parents=True, exist_ok=True)
    write_manifest(cfg, directory / "manifest.ini", manifest_meta())
    run = Run(cfg, directory)
    EXPERIMENT_FUNCS[cfg.experiment](run)
    run.finish()
    return directory


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


def report(directory) -> int:
    directory = Path(directory)
    manifest = directory / "manifest.ini"
    if not manifest.is_file():
        sys.stderr.write(f"error: no manifest.ini in {directory}\n")
        return 2
    try:
        read_manifest_meta(manifest)
        cfg = build_config(read_config_file(manifest))
    except ConfigError as exc:
        sys.stderr.write(f"error: corrupt manifest, key '{exc.key}': {exc.message}\n")
        return 2
    print(f"experiment: {cfg.experiment}  seed: {cfg.seed}  dir: {directory}")
    results = directory / "results.csv"
    if results.is_file():
        header, rows = read_csv(results)
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
        print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for r in rows:
            print("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    failed = False
    checks = directory / "checks.csv"
    if checks.is_file():
        _, rows = read_csv(checks)
        for name, value, op, tol, _ in rows:
            ok = evaluate(float(value), op, float(tol))
            failed |= not ok
            print(f"{'PASS' if ok else 'FAIL'} {name}: {float(value):.6g} {op} {float(tol):.6g}")
    return 1 if failed else 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _add_key_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration keys (override the config file)")
    for key in KEYS:
        if key.name == "experiment":
            continue
        flags = [f"--{key.name}"]
        if "_" in key.name:
            flags.insert(0, f"--{key.name.replace('_', '-')}")
        group.add_argument(*flags, dest=key.name, metavar="VALUE", default=None,
                           help=f"{key.help} (default {key.default})" if key.help else f"default {key.default}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ruinlab", description="Ruin with risky investment: simulation and densities.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("run",):
        sp = sub.add_parser(name, help="repeat a run from its config" if name == "run" else f"{name} experiment")
        sp.add_argument("--config", default=None, help="INI config file (a manifest.ini works too)")
        _add_key_flags(sp)
    rp = sub.add_parser("report", help="summarise a run directory")
    rp.add_argument("directory")
    return parser


def _attach_negative_values(argv):
    """Turn ``--key -1,0`` into ``--key=-1,0`` so lists may start with a minus."""
    flags = {f"--{k.name}" for k in KEYS} | {f"--{k.name.replace('_', '-')}" for k in KEYS} | {"--config"}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in flags and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1] not in flags:
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_negative_values(argv))
    if args.command == "report":
        return report(args.directory)
    try:
        raw = read_config_file(args.config) if args.config else {}
        for key in KEYS:
            v = getattr(args, key.name, None)
            if v is not None:
                raw[key.name] = v
        if args.command != "run":
            raw["experiment"] = args.command
        cfg = build_config(raw)
        execute(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"error: config key '{exc.key}': {exc.message}\n")
        return 2
    except DomainError as exc:
        sys.stderr.write(f"error: invalid parameters: {exc}\n")
        return 2
    except AccuracyError as exc:
        sys.stderr.write(f"accuracy error: {exc}\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
