"""
Payoffs and perceived free-riding costs
=======================================

Utilities of the three strategies for a group of 20, and how each
perception kind changes what a defector believes free-riding costs.
"""

import numpy as np

from instboot.game import PopulationState, payoff_breakdown, preset
from instboot.perception import (
    IDENTITY,
    AbsoluteNoise,
    CoarseBias,
    Prelec,
    ProportionalNoise,
    make_rng,
    perceive_freeride_cost,
    prelec_weight,
)

params = preset("favourable")
print(params)

# 12 defectors, 5 plain contributors, 3 monitors
state = PopulationState(12, 5, 3)
pb = payoff_breakdown(params, state)
print(f"B_g={pb.b_g:.3f}  B_m={pb.b_m:.3f}  C_f={pb.c_f:.3f}")
print(f"u_d={pb.u_d:.3f}  u_c={pb.u_c:.3f}  u_cm={pb.u_cm:.3f}")

# The Prelec curve overweights small probabilities for lambda < 1
q = np.array([0.01, 0.1, 0.25, np.exp(-1), 0.5, 0.9])
for lam in (0.8, 1.0, 1.2):
    print(f"lambda={lam}:", np.round(prelec_weight(q, 1.0, lam), 4))

catch = state.n_mon / params.n_group
true_cf = pb.c_f
rng = make_rng(0)
for spec in (IDENTITY, CoarseBias(1.5), Prelec(1.0, 0.8), ProportionalNoise(0.25, 4.0), AbsoluteNoise(8.0)):
    cf = perceive_freeride_cost(true_cf, catch, params, spec, rng)
    print(f"{spec!s:55s} perceived C_f = {cf:.3f}")

# noisy perceptions: a fresh draw every time
draws = [perceive_freeride_cost(true_cf, catch, params, ProportionalNoise(0.25, 4.0), rng) for _ in range(10_000)]
print("proportional noise: mean", np.mean(draws).round(3), "median", np.median(draws).round(3))
