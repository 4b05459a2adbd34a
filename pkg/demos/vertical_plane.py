"""
Vertical planes are stable
==========================

On the vertical plane ``x = 0`` the second variation along any compactly
supported field equals the integral of the squared derivative of the
field's normal component, so it is never negative.  We compare both sides
for a few random fields.
"""

import numpy as np

from hbern import variation as V
from hbern.surfaces import vertical_plane

plane = vertical_plane(1.0, 0.0, 0.0)
rng = np.random.default_rng(7)

for s in V.vertical_plane_stability(plane, rng, samples=4):
    print(f"V_II = {s.v2.value:.8f}   int (Z n)^2 = {s.z_squared:.8f}   "
          f"rel diff {s.rel_diff:.1e}   step {s.v2.step:.4f}")
