import pytest

from ruinlab.config import (
    DEFAULT_SEED,
    KEYS,
    build_config,
    parse_bool,
    parse_counting,
    parse_law,
    read_config_file,
    read_manifest_meta,
    write_manifest,
)
from ruinlab.errors import ConfigError
from ruinlab.model import Exponential, LogNormal, Pareto
from ruinlab.processes import DeterministicSchedule, Negated, NormalJump, Renewal


def test_keys_are_globally_unique():
    names = [k.name for k in KEYS]
    assert len(names) == len(set(names))


def test_defaults_build():
    cfg = build_config({})
    assert cfg.seed == DEFAULT_SEED
    assert cfg.horizons == [250.0, 500.0, 1000.0, 2000.0]
    assert cfg.claims == Exponential(1.0)
    assert cfg.counting is None and cfg.alpha is None


@pytest.mark.parametrize("text, law", [
    ("exponential(2)", Exponential(2.0)),
    ("Pareto(3, 1.5)", Pareto(3.0, 1.5)),
    ("lognormal(-0.5, 1)", LogNormal(-0.5, 1.0)),
])
def test_parse_law(text, law):
    assert parse_law(text) == law


def test_signed_laws_only_for_jumps():
    assert parse_law("normal(0, 0.2)", allow_signed=True) == NormalJump(0.0, 0.2)
    assert parse_law("-exponential(1)", allow_signed=True) == Negated(Exponential(1.0))
    for bad in ("normal(0, 1)", "-exponential(1)"):
        with pytest.raises(ValueError):
            parse_law(bad)
    for bad in ("gamma(1)", "exponential(1, 2)", "exponential"):
        with pytest.raises(ValueError):
            parse_law(bad, allow_signed=True)


def test_parse_counting():
    assert parse_counting("poisson") is None
    assert parse_counting("renewal(lognormal(-0.5,1))") == Renewal(LogNormal(-0.5, 1.0))
    assert parse_counting("schedule(1, 2.5)") == DeterministicSchedule([1.0, 2.5])
    with pytest.raises(ValueError):
        parse_counting("hawkes")


def test_parse_bool():
    assert parse_bool("Yes") and not parse_bool("0")
    with pytest.raises(ValueError):
        parse_bool("maybe")


@pytest.mark.parametrize("key, value", [
    ("lam", "-1"), ("dt", "0"), ("n_paths", "0"), ("mc_paths", "50"), ("scheme", "rk4"),
    ("seed", "-3"), ("u", "nan"), ("horizons", "10,-1"), ("premium_amplitude", "2"),
    ("variants", "sinusoidal,bogus"), ("claims", "normal(0,1)"),
])
def test_invalid_values_name_the_key(key, value):
    with pytest.raises(ConfigError) as info:
        build_config({key: value})
    assert info.value.key == key
    assert key in str(info.value)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as info:
        build_config({"n_pahts": "10"})
    assert info.value.key == "n_pahts"


def test_read_config_file(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("[run]\nseed = 5  # comment\n[numerics]\nn_paths = 300\n[meta]\nanything = 1\n")
    raw = read_config_file(path)
    assert raw == {"seed": "5", "n_paths": "300"}


@pytest.mark.parametrize("text, key", [
    ("[bogus]\nx = 1\n", "bogus"),
    ("[run]\nnope = 1\n", "nope"),
    ("[run]\nn_paths = 1\n", "n_paths"),
    ("no section\n", "config"),
])
def test_read_config_file_rejects(tmp_path, text, key):
    path = tmp_path / "b.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError) as info:
        read_config_file(path)
    assert info.value.key == key


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "none.cfg")


def test_manifest_roundtrip(tmp_path):
    cfg = build_config({"seed": "9", "x_values": "-1,0,1", "claims": "pareto(3,2)"})
    path = write_manifest(cfg, tmp_path / "manifest.ini", {"numpy": "x"})
    again = build_config(read_config_file(path))
    assert again.values == cfg.values
    assert read_manifest_meta(path) == {"numpy": "x"}


def test_with_values():
    cfg = build_config({}).with_values(u=3, n_paths=200)
    assert cfg.u == 3.0 and cfg.n_paths == 200


def test_shipped_configs_parse():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    for path in sorted(root.glob("*.cfg")):
        build_config(read_config_file(path))
