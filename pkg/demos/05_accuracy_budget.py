"""
Grid spacing and accuracy
=========================

The integration error of the grid scheme is bounded by c0 * sqrt(delta).
Here we watch the actual error shrink as the grid is refined.
"""
import math

import numpy as np

from stochcut import (AccuracyBudget, CircularCut, Hotspot, InverseDistanceLink, Rectangle,
                      compute_grid, edcc, hotspot_model)
from stochcut.grid import implied_eps

rec = Rectangle(0, 4, 0, 4)
model = hotspot_model(rec, [Hotspot(1.8, 2.1, 40.0, 0.6)], link=InverseDistanceLink())
cut = CircularCut((2, 2), 1.0)

ref = edcc(model, cut, delta=0.025).total
deltas = [0.4, 0.2, 0.1, 0.05]
errs = [abs(edcc(model, cut, delta=d).total - ref) for d in deltas]
for d, e in zip(deltas, errs):
    print(f"delta {d:<5} error {e:8.4f}   error/sqrt(delta) {e / math.sqrt(d):7.3f}")
print("fitted order", np.polyfit(np.log(deltas), np.log(errs), 1)[0])

# the default constant is the worst case and asks for tiny grids; a
# calibrated c0 gives practical spacings
budget = AccuracyBudget(2.0, c0=10.0)
print("c0=10, eps=2 -> delta", compute_grid(rec, 1.0, budget, model).delta)
print("default c0 at delta=0.1 guarantees eps =",
      f"{implied_eps(rec, 1.0, 0.1, AccuracyBudget(1.0), model)[0]:.3g}")
