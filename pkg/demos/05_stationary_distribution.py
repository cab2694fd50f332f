"""
Long-run behaviour with mutation
================================

With rare mutation the Moran chain is ergodic.  Its stationary
distribution shows how much time the population spends near each
attractor.
"""

import numpy as np

from instboot.game import preset
from instboot.moran import MoranConfig, count_states, stationary_distribution, transition_matrix

for name in ("favourable", "unfavourable"):
    cfg = MoranConfig(z_pop=20, gamma=1.0, mu=1e-3)
    P = transition_matrix(preset(name), config=cfg)
    pi = stationary_distribution(P)
    states = count_states(cfg.z_pop)
    top = np.argsort(pi)[::-1][:4]
    print(f"--- {name}: {len(states)} states")
    for k in top:
        print(f"  {tuple(states[k].tolist())}  {pi[k]:.4f}")
    defect_share = pi[states[:, 0] > 0.5 * cfg.z_pop].sum()
    print(f"  time with a defector majority: {defect_share:.3f}")
