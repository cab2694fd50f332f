"""
Finite populations with noisy perception
========================================

A population of 40 imitates via the Fermi rule.  Noise in the perceived
free-riding cost is redrawn at every fitness evaluation, so the
critical mass is read off the Monte-Carlo selection gradient.
"""

import numpy as np

from instboot.analysis import SIMULATED, basin_escape_rate, edge_threshold
from instboot.game import preset
from instboot.moran import MoranConfig, selection_gradient, simulate
from instboot.perception import IDENTITY, AbsoluteNoise, ProportionalNoise, make_rng

fav = preset("favourable")
cfg = MoranConfig(z_pop=40, gamma=1.0, mu=0.0, mc_samples=10_000, seed=0)

print("selection gradient at (20, 10, 10):", np.round(selection_gradient([20, 10, 10], fav, config=cfg), 5))

for name, spec in (
    ("identity", IDENTITY),
    ("propnoise 0.25-4", ProportionalNoise(0.25, 4.0)),
    ("propnoise 0.125-8", ProportionalNoise(0.125, 8.0)),
):
    m = edge_threshold(fav, spec, SIMULATED, cfg).m_star
    print(f"{name:18s} m* = {m:.4f}")

# One trajectory from a monitor-rich start
path = simulate([10, 5, 25], fav, IDENTITY, cfg, n_steps=5000, rng=make_rng(1))
print("trajectory end:", path[-1])

# Absolute noise lets populations escape the defector basin more often
cfg = MoranConfig(40, 1.0, 0.0, mc_samples=1000, seed=0)
for spec in (IDENTITY, AbsoluteNoise(8.0), AbsoluteNoise(16.0)):
    print(f"{spec!s:40s} escape rate {basin_escape_rate(fav, spec, cfg, n_runs=1000):.3f}")
