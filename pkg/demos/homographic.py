"""Collinear homographic motions: periods on the bounded window and escape for h > 0."""

import math

import numpy as np

from manev_isosceles import P0
from manev_isosceles import homographic as H
from manev_isosceles import potentials as pot

h = -1.0
rep = H.analyze(P0, h, 0.0, verify=False)
print(f"h={h}: centre S_r = {rep.S_r:.6f}, motions exist for |C| <= {rep.window_exists:.6f}")
print(f"periodic window: {rep.window_periodic[0]:.6f} < |C| <= {rep.window_periodic[1]:.6f}\n")
for C in np.linspace(70.0, 220.0, 6):
    rep = H.analyze(P0, h, C)
    print(f"C={C:7.2f}  r in [{rep.r_range[0]:8.3f}, {rep.r_range[1]:8.3f}]  "
          f"sigma period {rep.period_sigma:.6f}  physical period {rep.period_t:.4f}  {rep.integration_check}")
V0 = float(pot.V(P0, 0.0))
print(f"Kepler radial period 2 pi V0 / (-2h)^1.5 = {2 * math.pi * V0 / (-2 * h) ** 1.5:.4f}\n")

for C in (20.0, 100.0):
    rep = H.analyze(P0, 1.0, C)
    print(f"h=+1, C={C:g}: {rep.classification.value} ({rep.integration_check})")
