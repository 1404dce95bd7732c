"""Run configuration: a typed INI format with globally unique keys.

Grammar::

    file     := section*
    section  := "[" name "]" NEWLINE (key "=" value NEWLINE)*
    value    := int | float | bool | string | list | law

Keys are unique across sections, so every key is also a command-line flag
(``--n-paths`` or ``--n_paths``).  Flags override the file, the file
overrides the defaults.  The section ``[meta]`` is reserved for manifest
metadata and ignored on input.  ``#`` and ``;`` start comments.

Distribution strings::

    exponential(mean)  pareto(shape, scale)  lognormal(location, scale)
    normal(mean, sd)   -<law> (negated, for jumps)

Counting process strings::

    poisson  |  renewal(<law>)  |  schedule(t1, t2, ...)
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from .errors import ConfigError, DomainError
from .model import Exponential, LogNormal, Pareto
from .processes import DeterministicSchedule, Negated, NormalJump, Renewal

EXPERIMENTS = (
    "simulate",
    "ruin",
    "certain-ruin",
    "corollaries",
    "theta",
    "yor-density",
    "transition-density",
    "ruin-at-t",
    "diffusion-limit",
    "cf-check",
)

DEFAULT_SEED = 20240601
RESERVED_SECTIONS = ("meta",)


# --------------------------------------------------------------------------
# value parsers
# --------------------------------------------------------------------------

_CALL = re.compile(r"^\s*(-?)\s*([a-z_]+)\s*\((.*)\)\s*$")


def _numbers(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def parse_law(text: str, allow_signed: bool = False):
    """Parse a distribution string into a law object."""
    m = _CALL.match(text.lower())
    if not m:
        raise ValueError(f"cannot parse distribution {text!r}")
    neg, name, args = m.groups()
    vals = _numbers(args)
    makers = {
        "exponential": (Exponential, 1),
        "pareto": (Pareto, 2),
        "lognormal": (LogNormal, 2),
        "normal": (NormalJump, 2),
    }
    if name not in makers:
        raise ValueError(f"unknown distribution {name!r}")
    cls, nargs = makers[name]
    if len(vals) != nargs:
        raise ValueError(f"{name} takes {nargs} parameter(s), got {len(vals)}")
    if cls is NormalJump and not allow_signed:
        raise ValueError("normal laws are only allowed for jumps")
    law = cls(*vals)
    if neg:
        if not allow_signed:
            raise ValueError("negated laws are only allowed for jumps")
        law = Negated(law)
    return law


def parse_counting(text: str):
    t = text.strip().lower()
    if t == "poisson":
        return None
    m = re.match(r"^renewal\((.*)\)$", t)
    if m:
        return Renewal(parse_law(m.group(1)))
    m = re.match(r"^schedule\((.*)\)$", t)
    if m:
        return DeterministicSchedule(_numbers(m.group(1)))
    raise ValueError(f"cannot parse counting process {text!r}")


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


def _finite(v):
    if isinstance(v, float) and not math.isfinite(v):
        raise ValueError("must be finite")
    return v


# --------------------------------------------------------------------------
# key table
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Key:
    section: str
    name: str
    parse: Callable[[str], Any]
    default: str
    check: Optional[Callable[[Any], Optional[str]]] = None
    help: str = ""


def positive(v):
    return None if v is not None and v > 0 else "must be positive"


def nonneg(v):
    return None if v >= 0 else "must be >= 0"


def unit_interval(v):
    return None if 0 <= v <= 1 else "must lie in [0, 1]"


def at_least(n):
    return lambda v: None if v >= n else f"must be >= {n}"


def one_of(*opts):
    return lambda v: None if v in opts else f"must be one of {', '.join(opts)}"


def positive_list(v):
    return None if v and all(x > 0 for x in v) else "must be a non-empty list of positive numbers"


def nonempty(v):
    return None if v else "must be a non-empty list"


KEYS = [
    Key("run", "experiment", str, "certain-ruin", one_of(*EXPERIMENTS)),
    Key("run", "seed", int, str(DEFAULT_SEED), lambda v: None if 0 <= v < 2**64 else "must be in [0, 2^64)"),
    Key("run", "threads", int, "1", at_least(1)),
    Key("run", "out", str, ""),
    # risk model
    Key("risk", "u", float, "10", nonneg, "initial capital"),
    Key("risk", "premium", float, "1.1", positive, "premium rate c"),
    Key("risk", "premium_amplitude", float, "0", unit_interval, "sinusoidal premium amplitude (0 = constant)"),
    Key("risk", "premium_frequency", float, "0.1", positive),
    Key("risk", "lam", float, "1", positive, "claim intensity"),
    Key("risk", "claims", parse_law, "exponential(1)"),
    Key("risk", "counting", parse_counting, "poisson"),
    # investment
    Key("investment", "a", float, "0.01", None, "GBM drift"),
    Key("investment", "sigma", float, "0.2", nonneg, "volatility"),
    Key("investment", "alpha", parse_optional_float, "none", None, "exponent drift; overrides a when set"),
    Key("investment", "jump_intensity", float, "0", nonneg),
    Key("investment", "jump_law", lambda s: parse_law(s, allow_signed=True), "normal(0,0.5)"),
    # path numerics
    Key("numerics", "dt", float, "0.01", positive),
    Key("numerics", "scheme", str, "exact", one_of("exact", "dilation", "euler")),
    Key("numerics", "quadrature", str, "trapezoid", one_of("trapezoid", "left")),
    Key("numerics", "refine", int, "0", nonneg),
    Key("numerics", "horizon", float, "100", positive),
    Key("numerics", "horizons", _numbers, "250,500,1000,2000", positive_list),
    Key("numerics", "n_paths", int, "10000", at_least(1)),
    Key("numerics", "n_envelope", int, "0", nonneg),
    Key("numerics", "check_envelope", parse_bool, "false"),
    # corollary variants
    Key("corollaries", "variants", lambda s: [p.strip() for p in s.split(",") if p.strip()],
        "sinusoidal,renewal,levy",
        lambda v: None if v and set(v) <= {"sinusoidal", "renewal", "levy", "interest"}
        else "must list variants from sinusoidal, renewal, levy, interest"),
    Key("corollaries", "cor_amplitude", float, "0.3", unit_interval),
    Key("corollaries", "cor_frequency", float, "0.1", positive),
    Key("corollaries", "cor_interarrival", parse_law, "lognormal(-0.5,1)"),
    Key("corollaries", "cor_jump_intensity", float, "0.5", nonneg),
    Key("corollaries", "cor_jump_law", lambda s: parse_law(s, allow_signed=True), "normal(0,0.2)"),
    Key("corollaries", "cor_interest", float, "-0.5", None, "force of interest for the sigma=0 variant"),
    # diffusion model
    Key("diffusion", "rho", float, "0.1", None, "safety loading"),
    Key("diffusion", "mu", float, "1", positive, "mean claim"),
    Key("diffusion", "m", float, "2", positive, "second claim moment"),
    Key("diffusion", "drift", parse_optional_float, "none", None, "rho*lam*mu; derived when none"),
    Key("diffusion", "variance_rate", parse_optional_float, "none", None, "lam*m; derived when none"),
    # Yor / density numerics
    Key("density", "t", float, "1", positive),
    Key("density", "r", float, "1", positive, "Theta argument"),
    Key("density", "t_min", float, "0.25", positive),
    Key("density", "tol", float, "1e-10", positive),
    Key("density", "x_values", _numbers, "-1,0,1", nonempty),
    Key("density", "u_values", _numbers, "0.5,1,2,4", nonempty),
    Key("density", "per_decade", int, "60", at_least(10)),
    Key("density", "nz", int, "241", at_least(3)),
    Key("density", "nx", int, "161", at_least(3)),
    Key("density", "mc_paths", int, "0", lambda v: None if v == 0 or v >= 100 else "must be 0 or >= 100"),
    Key("density", "mc_dt", float, "0.001", positive),
    Key("density", "bins", int, "20", at_least(2)),
    Key("density", "xi_values", _numbers, "-2,-1,0,1,2", nonempty),
    Key("density", "zeta_values", _numbers, "-2,-1,0,1,2", nonempty),
    Key("density", "conv_mean", str, "time_change", one_of("time_change", "calendar")),
    Key("density", "conv_variance", str, "time_change", one_of("time_change", "squared")),
    Key("density", "conv_x_drift", parse_bool, "true"),
    # pass/fail tolerances used by summaries and `report`
    Key("tolerances", "tol_min_ruin", float, "0.95", nonneg),
    Key("tolerances", "tol_corollary", float, "0.90", nonneg),
    Key("tolerances", "tol_mass", float, "0.02", positive),
    Key("tolerances", "tol_defect", float, "0.01", positive),
    Key("tolerances", "tol_tv", float, "0.05", positive),
    Key("tolerances", "tol_cf", float, "0.02", positive),
    Key("tolerances", "tol_abs", float, "0.01", positive),
]

KEY_INDEX = {k.name: k for k in KEYS}
SECTIONS = tuple(dict.fromkeys(k.section for k in KEYS))


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration.  ``raw`` keeps the resolved strings for the manifest."""

    values: dict
    raw: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def experiment(self) -> str:
        return self.values["experiment"]

    def with_values(self, **updates) -> "RunConfig":
        raw = dict(self.raw)
        raw.update({k: str(v) for k, v in updates.items()})
        return build_config(raw)


def read_config_file(path) -> dict:
    """Raw ``key -> string`` mapping from an INI file, rejecting unknown keys."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError("config", f"malformed config file {path}: {exc}") from exc
    raw = {}
    for section in parser.sections():
        if section in RESERVED_SECTIONS:
            continue
        if section not in SECTIONS:
            raise ConfigError(section, f"unknown section [{section}] in {path}")
        for name, value in parser.items(section):
            key = KEY_INDEX.get(name)
            if key is None:
                raise ConfigError(name, f"unknown key '{name}' in section [{section}]")
            if key.section != section:
                raise ConfigError(name, f"key '{name}' belongs in section [{key.section}], not [{section}]")
            raw[name] = value
    return raw


def build_config(raw: dict) -> RunConfig:
    """Parse and validate every key; errors name the offending key."""
    resolved, values = {}, {}
    for name in raw:
        if name not in KEY_INDEX:
            raise ConfigError(name, f"unknown key '{name}'")
    for key in KEYS:
        text = str(raw.get(key.name, key.default))
        try:
            v = _finite(key.parse(text))
        except (ValueError, DomainError, TypeError) as exc:
            raise ConfigError(key.name, f"invalid value {text!r}: {exc}") from exc
        if key.check is not None:
            problem = key.check(v)
            if problem:
                raise ConfigError(key.name, f"{problem}, got {text!r}")
        resolved[key.name] = text
        values[key.name] = v
    return RunConfig(values, resolved)


def write_manifest(cfg: RunConfig, path, meta: dict) -> Path:
    """Resolved config plus metadata; re-reading it reproduces the run."""
    path = Path(path)
    lines = []
    for section in SECTIONS:
        lines.append(f"[{section}]")
        for key in KEYS:
            if key.section == section:
                lines.append(f"{key.name} = {cfg.raw[key.name]}")
        lines.append("")
    lines.append("[meta]")
    for k, v in meta.items():
        lines.append(f"{k} = {v}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest_meta(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read(path, encoding="utf-8")
    if not parser.has_section("meta"):
        raise ConfigError("manifest", f"{path} has no [meta] section")
    return dict(parser.items("meta"))
