"""
Simplex figures
===============

Writes SVG vector fields with the rest points marked (filled = stable).
Pass an output directory as the first argument (default: current dir).
"""

import sys
from pathlib import Path

from instboot.game import preset
from instboot.moran import MoranConfig, drift_field
from instboot.perception import CoarseBias, ProportionalNoise
from instboot.replicator import find_fixed_points, gradient_field
from instboot.svg import render_simplex

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)

for name in ("favourable", "unfavourable"):
    p = preset(name)
    render_simplex(gradient_field(p, resolution=20), find_fixed_points(p), out / f"replicator_{name}.svg", name)

fav = preset("favourable")
spec = CoarseBias(1.5)
render_simplex(gradient_field(fav, spec, 20), find_fixed_points(fav, spec), out / "coarse_1.5.svg", "coarse 1.5")

# stochastic field: arrows only
field = drift_field(fav, ProportionalNoise(0.25, 4.0), MoranConfig(40, 1.0, 1e-3, mc_samples=500, seed=0), 20)
render_simplex(field, [], out / "moran_propnoise.svg", "propnoise 0.25-4")
print("wrote", sorted(str(p.name) for p in out.glob("*.svg")))
