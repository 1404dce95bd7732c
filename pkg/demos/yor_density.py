"""Conditional density of A_t = int exp(2 B_s) ds given B_t = x, against simulation."""

import numpy as np

from ruinlab.yor import bridge_mean, conditional_bin_probabilities, mc_oracle_samples, theta, yor_normalization

print("Theta(1, 1) =", theta(1.0, 1.0).value)

t, x = 1.0, 0.0
mass, err = yor_normalization(t, x)
print(f"mass of a_{t:g}({x:g}, .) = {mass:.10f} (+- {err:.1e})")

a, z = mc_oracle_samples(1.0, 0.0, t, 200_000, 1e-3, seed=3)
sel = np.abs(z - x) < 0.05
print(f"E[A | B = {x:g}]: exact {bridge_mean(t, x):.4f}, simulated {a[sel].mean():.4f} ({sel.sum()} paths)")

edges = np.r_[0.0, np.logspace(-1, 1, 9), np.inf]
model = conditional_bin_probabilities(t, x - 0.05, x + 0.05, edges)
emp = np.histogram(a[sel], edges)[0] / sel.sum()
for lo, hi, p, q in zip(edges[:-1], edges[1:], model, emp):
    print(f"  A in [{lo:7.3f}, {hi:7.3f}):  density {p:.4f}   simulation {q:.4f}")
