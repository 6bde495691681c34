"""
Expected damage of a single circular cut
========================================

Nodes are a Poisson process of rate 1 on a 6 x 6 square, any two nodes are
linked with probability 1/dist and every link carries capacity 1.  We cut a
disk of radius 1 out of the middle and ask how much capacity dies with it.
"""
import math

from stochcut import CircularCut, InverseDistanceLink, Rectangle, edcc, empirical_tec, homogeneous_model

model = homogeneous_model(Rectangle(0, 6, 0, 6), 1.0, InverseDistanceLink())
cut = CircularCut((3, 3), 1.0)

# the integrator splits the damage by link type: both ends inside the disk
# (alpha), one end inside (beta), or a link passing over the disk (gamma)
res = edcc(model, cut, delta=0.05)
print(f"alpha {res.alpha:8.3f}  beta {res.beta:8.3f}  gamma {res.gamma:8.3f}  total {res.total:8.3f}")

# the same number from simulated networks
est = empirical_tec(model, cut, 2000, seed=1)
print(f"Monte-Carlo total {est.mean:.3f} +- {est.std_error:.3f} over {est.n_samples} networks")

# with y = 1 the alpha part has a closed form: (lambda * pi r^2)^2 / 2
flat = homogeneous_model(Rectangle(0, 6, 0, 6), 1.0)
for delta in (0.1, 0.05, 0.025):
    a = edcc(flat, cut, delta=delta).alpha
    print(f"delta {delta:<6} alpha {a:.5f}  (pi^2/2 = {math.pi ** 2 / 2:.5f})")
