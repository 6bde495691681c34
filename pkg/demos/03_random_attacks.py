"""
Random attacks
==============

A cut whose center is random rather than chosen: uniformly over all
admissible centers, or drawn from a density psi concentrated somewhere.
"""
from stochcut import (AttackDistribution, GaussianHotspots, Hotspot, InverseDistanceLink,
                      AccuracyBudget, Rectangle, fsl, hotspot_model, rcce)

rec = Rectangle(0, 6, 0, 5)
model = hotspot_model(rec, [Hotspot(2.2, 2.8, 25.0, 0.6)], 0.3, InverseDistanceLink())
budget = AccuracyBudget(1.0, c0=1.0)

smap = fsl(model, 1.0, budget, delta=0.25)
uniform = rcce(model, 1.0, budget, smap=smap)
print(f"uniform attack: {uniform:.2f}  (map ranges {smap.values.min():.2f} .. {smap.values.max():.2f})")

# psi must integrate to one over the admissible centers [1, 5] x [1, 4]
for where in [(2.2, 2.8), (4.5, 1.5)]:
    shape = GaussianHotspots((Hotspot(*where, 1.0, 0.3),))
    psi = GaussianHotspots((Hotspot(*where, 1.0 / shape.total_mass(smap.rec_r), 0.3),))
    value = rcce(model, 1.0, budget, AttackDistribution.density(psi), smap=smap)
    print(f"attacks concentrated near {where}: {value:.2f}")
