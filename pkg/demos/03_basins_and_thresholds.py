"""
Basins of attraction and critical mass
======================================

How distorted perception of the free-riding cost moves the critical mass
of monitors on the D-CM edge and resizes the cooperative basin.
"""

from instboot.analysis import basin_map, edge_threshold
from instboot.game import preset
from instboot.perception import IDENTITY, CoarseBias, Prelec

fav = preset("favourable")
specs = {
    "identity": IDENTITY,
    "coarse 0.75": CoarseBias(0.75),
    "coarse 1.5": CoarseBias(1.5),
    "prelec 0.8": Prelec(1.0, 0.8),
    "prelec 1.2": Prelec(1.0, 1.2),
}

print(f"{'perception':12s} {'m*':>9s} {'cooperative':>12s}")
for name, spec in specs.items():
    m = edge_threshold(fav, spec).m_star
    rep = basin_map(fav, spec, resolution=60)
    print(f"{name:12s} {m:9.5f} {rep.fractions['cooperative']:12.4f}")

# Overestimating the cost (bias > 1) lowers the critical mass, so the
# cooperative basin grows; underestimating it does the opposite.
