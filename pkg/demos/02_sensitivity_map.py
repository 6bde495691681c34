"""
Where is the worst place to cut?
================================

Two metro areas, one three times heavier than the other.  The sensitivity
map evaluates the damage of a radius-1 cut centered at every point of a
grid and the worst cut is its maximum.
"""
import numpy as np

from stochcut import (AccuracyBudget, Hotspot, InverseDistanceLink, Rectangle, export_map, fsl,
                      hotspot_model, worst_cut)

rec = Rectangle(0, 12, 0, 6)
model = hotspot_model(rec, [Hotspot(3, 3, 30, 0.5), Hotspot(8.5, 3, 10, 0.5)],
                      link=InverseDistanceLink())

# an explicit c0 makes the spacing rule delta = (eps / 2 / c0)^2 usable;
# FSL spends half of eps on the spacing between centers
budget = AccuracyBudget(additive_eps=20.0, c0=25.0)
smap = fsl(model, 1.0, budget)
print("grid spacing", smap.delta, "map shape", smap.values.shape)

cut, value = worst_cut(smap)
print(f"worst cut at ({cut.center.x:.2f}, {cut.center.y:.2f}), damage {value:.1f}")

# crude text rendering, north at the top
levels = " .:-=+*#%@"
v = smap.values / smap.values.max()
for row in v[::-1]:
    print("".join(levels[min(int(x * len(levels)), len(levels) - 1)] for x in row))

export_map(smap, "sensitivity_map.csv")
print("map written to sensitivity_map.csv")
