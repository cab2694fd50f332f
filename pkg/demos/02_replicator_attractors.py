"""
Replicator dynamics and the bootstrapping problem
=================================================

With favourable parameters there are two stable states: all defectors,
and a defector-free mix of contributors and monitors.  With costly
monitoring (delta = 0.5) only the all-defector state survives.
"""

import numpy as np

from instboot.game import preset
from instboot.replicator import find_fixed_points, integrate_trajectory

for name in ("favourable", "unfavourable"):
    print(f"--- {name}")
    for fp in find_fixed_points(preset(name)):
        eig = np.round(fp.eigenvalues.real, 4)
        print(f"  x={np.round(fp.location, 4)}  {fp.stability.value:9s} eig={eig}")

# Two nearby starts on either side of the critical mass of monitors.
# Without plain contributors the D-CM edge is invariant, so the upper
# start runs to the CM corner rather than to the C-CM mix.
fav = preset("favourable")
for m in (0.24, 0.28):
    path = integrate_trajectory([1 - m, 0.0, m], fav, step=0.05, n_steps=2000)
    print(f"start x_cm={m}: ends at {np.round(path[-1], 3)}")

# An interior start above the threshold
path = integrate_trajectory([0.3, 0.3, 0.4], fav, step=0.05, n_steps=2000)
print("interior start ends at", np.round(path[-1], 3))
