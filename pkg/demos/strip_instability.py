"""
An unstable H-minimal strip
===========================

The surface ``x = y tan(tanh(t))`` is H-minimal with no characteristic
points, yet its second variation of perimeter can be made negative.  This
script checks minimality numerically and then builds a certificate.
"""

import numpy as np

from hbern.gexpr import builtin
from hbern.hcalc import hmean_patch
from hbern.instability import certify_instability
from hbern.surfaces import strip_new

S = strip_new(builtin("tan_tanh"))
print("strip:", S.describe())

# H-mean curvature on a grid of the patch
u, v = np.meshgrid(np.linspace(-2, 2, 41), np.linspace(-3, 3, 41))
H = hmean_patch(S.patch, u, v)
print(f"max |H| on the grid: {np.max(np.abs(H)):.1e}")

# the certificate: smallest k0 where the test function wins, and the
# second variation along it
cert = certify_instability(S)
print(f"window J = ({cert['J'][0]:.3f}, {cert['J'][1]:.3f}), delta = {cert['delta']:.4f}")
print(f"k0 = {cert['k0']}, lhs = {cert['lhs']:.6g}, rhs = {cert['rhs']:.6g}")
print(f"second variation: formula {cert['v2']:.6g}, finite differences {cert['v2_fd']:.6g}")

for row in cert["history"]:
    mark = "ok" if row["accepted"] else "--"
    print(f"  k = {row['k']:5d}  lhs/rhs = {row['lhs'] / row['rhs']:.4f}  {mark}")
