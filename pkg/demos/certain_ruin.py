"""Ruin frequency under risky investment on either side of alpha = 0.

Two GBM investments with the same volatility: a = 0.01 gives
alpha = a - sigma^2/2 = -0.01 (certain ruin), a = 0.05 gives alpha = +0.03.
Both use the same random streams, so the comparison is pathwise.
"""

from ruinlab import GBM, Exponential, RiskParams, SchemeConfig, certain_ruin_experiment

params = RiskParams(u=10.0, premium=1.1, lam=1.0, claims=Exponential(1.0))
cfg = SchemeConfig(dt=0.02)
horizons = [250, 500, 1000]

for a in (0.01, 0.05):
    inv = GBM(a, 0.2)
    rep = certain_ruin_experiment(params, inv, cfg, horizons, n_paths=1000, seed=1)
    freqs = "  ".join(f"T={e.horizon:>5g}: {e.estimate:.3f}" for e in rep.estimates)
    print(f"a={a:<5} alpha={inv.alpha:+.3f} regime={rep.regime.value:<9} {freqs}")
