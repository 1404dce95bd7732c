import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from oracles import FROZEN, bridge_mean_mp, theta_mp
from ruinlab.errors import DomainError, SmallTimeRefusal
from ruinlab.io import read_csv, read_grid_binary
from ruinlab.yor import (
    T_MIN,
    bridge_mean,
    default_u_grid,
    mc_oracle_joint,
    mc_oracle_samples,
    tabulate_yor_density,
    theta,
    yor_density,
    yor_density_scaled,
    yor_density_with_error,
    yor_normalization,
)


@pytest.mark.parametrize("rt", sorted(FROZEN["theta"]))
def test_theta_frozen_values(rt):
    r, t = rt
    expected = FROZEN["theta"][rt]
    ev = theta(r, t)
    assert ev.value == pytest.approx(expected, rel=1e-8, abs=1e-14 * expected + 1e-300)
    assert abs(ev.value - expected) <= max(10 * ev.error, 1e-12 * abs(expected))


def test_theta_oracle_fresh_point():
    assert theta(2.0, 1.5).value == pytest.approx(theta_mp(2.0, 1.5), rel=1e-9)


def test_theta_large_r_is_tiny():
    assert theta(60.0, 1.0).value < 1e-15


def test_theta_refuses_small_time():
    with pytest.raises(SmallTimeRefusal):
        theta(1.0, 0.1)
    assert theta(1.0, 0.1, t_min=0.05).t == 0.1
    with pytest.raises(DomainError):
        theta(-1.0, 1.0)


def test_theta_error_covers_refinement():
    for r, t in [(0.3, 0.5), (3.0, 2.0), (10.0, 4.0)]:
        a, b = theta(r, t), theta(r, t, depth=2)
        assert abs(a.value - b.value) <= a.error + 1e-300


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.25, 8.0))
def test_theta_nonnegative_within_error(r, t):
    ev = theta(r, t)
    assert ev.value >= -ev.error


def test_density_vanishes_near_zero():
    assert yor_density(1.0, 0.0, 1e-4) < 1e-10


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("x", [-1.0, 0.0, 1.0])
def test_normalization(t, x):
    mass, err = yor_normalization(t, x)
    assert abs(mass - 1.0) < 1e-6 + err


@pytest.mark.parametrize("tx", sorted(FROZEN["bridge_mean"]))
def test_bridge_mean_frozen(tx):
    assert bridge_mean(*tx) == pytest.approx(FROZEN["bridge_mean"][tx], rel=1e-12)


@pytest.mark.parametrize("t, x", [(1.0, 0.0), (2.0, 1.0), (0.5, -1.0), (1.5, 0.4)])
def test_density_mean_equals_bridge_mean(t, x):
    u = default_u_grid(t, x, per_decade=200)
    mean = np.trapezoid(yor_density(t, x, u) * u * u, np.log(u))
    assert mean == pytest.approx(bridge_mean_mp(t, x), rel=1e-6)


def test_conditional_mean_against_mc():
    a, z = mc_oracle_samples(1.0, 0.0, 1.0, 200_000, 1e-3, seed=1)
    sel = np.abs(z) < 0.05
    emp = a[sel]
    assert abs(emp.mean() - bridge_mean(1.0, 0.0)) < 4 * emp.std() / math.sqrt(emp.size) + 0.01


def test_scaled_density_identity_at_unit_sigma():
    u = np.array([0.3, 1.0, 2.5])
    np.testing.assert_array_equal(yor_density_scaled(1.0, -0.7, 1.0, 0.2, u), yor_density(1.0, 0.2, u))


@settings(max_examples=10, deadline=None)
@given(st.floats(-1, 1), st.floats(0.6, 1.5))
def test_scaled_density_does_not_depend_on_alpha(alpha, sigma):
    u = np.array([0.5, 1.0, 2.0])
    np.testing.assert_array_equal(yor_density_scaled(sigma, alpha, 1.0, 0.1, u),
                                  yor_density_scaled(sigma, 0.0, 1.0, 0.1, u))


def test_scaled_density_mean_against_mc():
    sigma, alpha, t, x = 0.5, -0.2, 2.0, 0.0
    u = default_u_grid(sigma**2 * t, x, per_decade=100) / sigma**2
    dens = yor_density_scaled(sigma, alpha, t, x, u)
    mean = np.trapezoid(dens * u * u, np.log(u))
    assert np.trapezoid(dens * u, np.log(u)) == pytest.approx(1.0, abs=1e-6)
    a, z = mc_oracle_samples(sigma, alpha, t, 200_000, 1e-3, seed=2)
    sel = np.abs(z - x) < 0.03
    emp = a[sel]
    assert abs(emp.mean() - mean) < 4 * emp.std() / math.sqrt(emp.size) + 0.005


def test_oracle_small_sigma_concentrates():
    alpha, t = -0.3, 1.0
    a, z = mc_oracle_samples(1e-8, alpha, t, 1000, 1e-3, seed=3)
    expected = math.expm1(2 * alpha * t) / (2 * alpha)
    np.testing.assert_allclose(a, expected, rtol=1e-6)
    np.testing.assert_allclose(z, alpha * t, atol=1e-6)


def test_oracle_mean_functional():
    a, _ = mc_oracle_samples(1.0, 0.0, 1.0, 100_000, 1e-3, seed=4)
    expected = math.expm1(2.0) / 2
    assert abs(a.mean() - expected) < 4 * a.std() / math.sqrt(a.size)


def test_oracle_endpoint_marginal():
    _, z = mc_oracle_samples(0.8, -0.1, 2.0, 50_000, 1e-2, seed=5)
    assert stats.kstest(z, "norm", args=(-0.2, 0.8 * math.sqrt(2.0))).pvalue > 1e-3


def test_oracle_multiple_times_match_single():
    a2, z2 = mc_oracle_samples(1.0, 0.0, [0.5, 1.0], 5000, 1e-2, seed=6)
    a1, z1 = mc_oracle_samples(1.0, 0.0, 1.0, 5000, 1e-2, seed=6)
    np.testing.assert_array_equal(a2[1], a1)
    np.testing.assert_array_equal(z2[1], z1)
    assert np.all(a2[0] < a2[1])


def test_oracle_joint_thread_independent():
    edges_a = np.linspace(0, 10, 11)
    edges_x = np.linspace(-3, 3, 7)
    h1 = mc_oracle_joint(1.0, 0.0, 1.0, 40_000, 1e-2, 7, edges_a, edges_x, threads=1)
    h2 = mc_oracle_joint(1.0, 0.0, 1.0, 40_000, 1e-2, 7, edges_a, edges_x, threads=3)
    np.testing.assert_array_equal(h1.counts, h2.counts)
    assert h1.probabilities().sum() <= 1.0


def test_oracle_rejects_off_grid_time():
    with pytest.raises(DomainError):
        mc_oracle_samples(1.0, 0.0, 0.1234, 10, 1e-2, seed=0)


def test_density_errors_are_small():
    u = default_u_grid(1.0, 0.0, 20)
    v, e = yor_density_with_error(1.0, 0.0, u)
    assert np.all(v >= -e)
    assert e.max() < 1e-8 * v.max()


def test_tabulation_roundtrip(tmp_path):
    grid = tabulate_yor_density(1.0, [-1.0, 0.0], per_decade=10)
    assert np.all(grid.defect < 1e-3)
    header, rows = read_csv(grid.to_csv(tmp_path / "a.csv"))
    assert header == ["t", "x", "u", "value", "err"]
    assert len(rows) == grid.values.size
    assert float(rows[5][3]) == grid.values[0, 5]
    axes, values, errors = read_grid_binary(grid.to_binary(tmp_path / "a.bin"))
    np.testing.assert_array_equal(axes[0], grid.x)
    np.testing.assert_array_equal(values, grid.values)
    np.testing.assert_array_equal(errors, grid.errors)


def test_t_min_constant():
    assert T_MIN == 0.25
    with pytest.raises(SmallTimeRefusal):
        yor_density(0.2, 0.0, 1.0)
