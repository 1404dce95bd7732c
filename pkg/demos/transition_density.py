"""Joint law of invested capital and investment level at t = 1, and review-date ruin."""

from ruinlab.density import (
    DiffusionRiskParams,
    cell_probabilities,
    mc_density_oracle,
    quantile_edges,
    ruin_probability_at,
    tabulate_transition_density,
    total_variation,
)

p = DiffusionRiskParams(u=2.0, drift=0.1, variance_rate=1.0, sigma=1.0, alpha=-0.1)

grid = tabulate_transition_density(p, 1.0, nz=121, nx=81)
print(f"grid mass {grid.mass:.5f}, mass at z <= 0 {grid.ruin_mass()[0]:.5f}")

res = ruin_probability_at(p, 1.0)
samples = mc_density_oracle(p, 1.0, 100_000, 1e-2, seed=5)
print(f"P(X'_1 <= 0): density {res.probability:.5f} (budget {res.error_budget:.1e}), "
      f"simulation {samples.ruin_fraction():.5f}")

ze, xe = quantile_edges(samples, bins=10)
tv = total_variation(cell_probabilities(p, 1.0, ze, xe), samples.histogram(ze, xe))
print(f"total variation on a 10x10 grid: {tv:.4f}")

for u in (0.5, 1.0, 2.0, 4.0):
    print(f"u={u:<4g} P(ruined at review date t=1) = {ruin_probability_at(p.with_u(u), 1.0).probability:.5f}")
