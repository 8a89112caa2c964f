"""How the collision manifold changes shape as the angular momentum C grows."""

import numpy as np

from manev_isosceles import P0, manifold
from manev_isosceles import potentials as pot

cp = pot.critical_points(P0)
print(f"U(0) = {pot.U(P0, 0.0):.6g}   max U = {pot.u_max(P0):.6g}")
print(f"critical angles: theta_V = {cp.theta_v:.10f}  theta_W = {cp.theta_w:.10f}")
lo, hi = manifold.thresholds(P0)
print(f"thresholds: {lo:.6f}  {hi:.6f}\n")

print(f"{'C':>6}  {'class':<24} interior equilibria")
for C in np.arange(0.0, 70.0, 5.0):
    cls = manifold.classify(P0, C).cls.value
    kinds = [e.kind.value for e in manifold.equilibria(P0, C) if e.location is not None]
    print(f"{C:6.1f}  {cls:<24} {', '.join(kinds) or '-'}")
