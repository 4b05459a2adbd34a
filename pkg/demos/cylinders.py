"""
Vertical cylinders in higher dimensions
=======================================

In H^n a vertical cylinder ``{h(z) = 0} x R`` has the Euclidean mean
curvature of its base as horizontal mean curvature, and its horizontal
perimeter agrees with the Euclidean area.
"""

import numpy as np

from hbern import highdim

n, R = 2, 1.5
C = highdim.sphere_cylinder(n, R)
rng = np.random.default_rng(0)
z = rng.normal(size=(2 * n, 5))
z *= R / np.linalg.norm(z, axis=0)
print("H on the sphere cylinder:", highdim.cylinder_hmean(C, list(z)))
print("expected (2n - 1)/R =", (2 * n - 1) / R)

# the same value from the full Heisenberg operator with t included
pts = list(z) + [rng.uniform(-1, 1, 5)]
print("via the H^n frame:     ", highdim.heisenberg_hmean(highdim.cylinder_defining(C), n, pts))

box = [(0.3, 1.2), (0.4, 1.1), (0.0, 2.0), (-0.5, 0.5)]
chk = highdim.cylinder_perimeter_check(highdim.sphere_patch(n, R), n, box)
print(f"sigma_H = {chk.sigma_h:.12f}, Hausdorff = {chk.hausdorff:.12f}, "
      f"closed form = {highdim.sphere_patch_area(n, R, box):.12f}")
