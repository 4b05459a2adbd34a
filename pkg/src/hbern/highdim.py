"""Vertical cylinders in the Heisenberg group H^n.

Coordinates are ordered ``(x_1..x_n, y_1..y_n, t)`` with frame

    X_i = d/dx_i - (y_i/2) d/dt,    Y_i = d/dy_i + (x_i/2) d/dt,    T = d/dt.

A vertical cylinder is the zero set of a function ``h`` of the first 2n
coordinates only.  Its horizontal gradient is the Euclidean gradient of
``h``, so the horizontal mean curvature reduces to ``div(grad h / |grad h|)``
on R^2n and the horizontal perimeter measure equals the Euclidean one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .gexpr import as_function
from .jets import Jet
from .surfaces import NotApplicable, _lift


class GradientFloor(NotApplicable):
    """|grad h| fell below the cylinder's floor alpha."""


@dataclass(frozen=True)
class CylinderSurface:
    """``{h(x, y) = 0} x R_t`` in H^n; ``h`` takes 2n arguments."""

    n: int
    h: Callable
    alpha: float = 1e-9
    window: tuple | None = None
    name: str = "cylinder"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")


def sphere_cylinder(n, R):
    """``|z| = R`` with ``h = |z| - R``."""

    def h(*z):
        s = z[0] * z[0]
        for c in z[1:]:
            s = s + c * c
        return s**0.5 - R

    return CylinderSurface(n, h, name=f"sphere(R={R:g})")


def plane_cylinder(n, normal, offset=0.0):
    a = np.asarray(normal, float)
    if a.shape != (2 * n,) or not np.any(a):
        raise ValueError("normal must be a non-zero vector of length 2n")

    def h(*z):
        out = -offset
        for ai, c in zip(a, z):
            out = c * ai + out
        return out

    return CylinderSurface(n, h, name="plane")


def graph_cylinder(n, f):
    """``y_n = f(x_1..x_n, y_1..y_{n-1})`` with ``h = y_n - f``."""
    names = tuple(f"x{i + 1}" for i in range(n)) + tuple(f"y{i + 1}" for i in range(n - 1))
    f = as_function(f, names) if isinstance(f, str) else f

    def h(*z):
        return z[2 * n - 1] - f(*z[: 2 * n - 1])

    return CylinderSurface(n, h, name="graph")


def _jets(C, point, order):
    pt = [np.asarray(c, float) for c in point]
    if len(pt) not in (2 * C.n, 2 * C.n + 1):
        raise ValueError(f"point needs {2 * C.n} (or {2 * C.n + 1}) coordinates")
    Z = Jet.variables(pt[: 2 * C.n], order)
    return _lift(C.h(*Z), Z[0])


def cylinder_frame(C, point):
    """Horizontal gradient ``(X_i h, Y_i h)`` (equal to grad h), its T
    component (zero) and ``W = |grad h|``."""
    j = _jets(C, point, 1)
    grad = np.stack([j.deriv(i) for i in range(2 * C.n)])
    W = np.sqrt(np.sum(grad * grad, axis=0))
    if np.any(W < C.alpha):
        raise GradientFloor(f"|grad h| < alpha = {C.alpha:g}")
    return {"horizontal": grad, "T": np.zeros_like(W), "W": W}


def cylinder_hmean(C, point):
    """``div(grad h / |grad h|)`` on R^2n."""
    j = _jets(C, point, 2)
    m = 2 * C.n
    g = np.stack([j.deriv(i) for i in range(m)])
    W2 = np.sum(g * g, axis=0)
    W = np.sqrt(W2)
    if np.any(W < C.alpha):
        raise GradientFloor(f"|grad h| < alpha = {C.alpha:g}")
    lap = sum(j.deriv(i, i) for i in range(m))
    hess = sum(g[i] * g[k] * j.deriv(i, k) for i in range(m) for k in range(m))
    return lap / W - hess / (W * W2)


def heisenberg_hmean(phi, n, point):
    """``sum_i X_i(p_i/W) + Y_i(q_i/W)`` for a defining function
    ``phi(x_1..x_n, y_1..y_n, t)`` on H^n."""
    pt = [np.asarray(c, float) for c in point]
    V = Jet.variables(pt, 2)
    P = _lift(phi(*V), V[0])
    x, y = pt[:n], pt[n: 2 * n]
    Pt = P.diff(2 * n)
    Vt = [v.truncate(1) for v in V]
    comps = []
    for i in range(n):
        comps.append(P.diff(i) - 0.5 * Vt[n + i] * Pt)
    for i in range(n):
        comps.append(P.diff(n + i) + 0.5 * Vt[i] * Pt)
    W2 = comps[0] * comps[0]
    for c in comps[1:]:
        W2 = W2 + c * c
    inv = W2 ** -0.5
    out = 0.0
    for i in range(n):
        u = comps[i] * inv
        out = out + u.deriv(i) - 0.5 * y[i] * u.deriv(2 * n)
        v = comps[n + i] * inv
        out = out + v.deriv(n + i) + 0.5 * x[i] * v.deriv(2 * n)
    return out


def cylinder_defining(C):
    """The cylinder's defining function on H^n (independent of t)."""
    return lambda *z: C.h(*z[: 2 * C.n])


# perimeter versus Hausdorff measure

def _normal_minors(J):
    """Generalised cross product of the 2n columns of ``J`` (shape
    (..., 2n+1, 2n)): ``N_k = (-1)^k det(J without row k)``."""
    m1 = J.shape[-2]
    out = []
    for k in range(m1):
        sub = np.delete(J, k, axis=-2)
        out.append((-1) ** k * np.linalg.det(sub))
    return np.stack(out)


def measure_densities(param, n, U):
    """``(W, |N|, omega)`` for a parametrisation ``param`` of a 2n-dimensional
    patch in H^n; ``U`` is a list of 2n parameter arrays.

    ``W`` is the horizontal perimeter density, ``|N|`` the Euclidean area
    density (2n-dimensional Hausdorff measure) and ``omega`` the T part.
    """
    m = 2 * n
    P = Jet.variables([np.asarray(u, float) for u in U], 1)
    coords = [_lift(c, P[0]) for c in param(*P)]
    if len(coords) != m + 1:
        raise ValueError("param must return 2n+1 coordinates")
    J = np.stack([np.stack([c.deriv(i) for i in range(m)], axis=-1) for c in coords], axis=-2)
    N = _normal_minors(J)
    x = [c.value for c in coords[:n]]
    y = [c.value for c in coords[n:m]]
    w = N[m]
    p = [N[i] - 0.5 * y[i] * w for i in range(n)]
    q = [N[n + i] + 0.5 * x[i] * w for i in range(n)]
    W = np.sqrt(sum(a * a for a in p) + sum(b * b for b in q))
    return W, np.sqrt(np.sum(N * N, axis=0)), w


@dataclass
class PerimeterCheck:
    sigma_h: float
    hausdorff: float
    nodes: int
    change: float

    @property
    def rel_diff(self):
        return abs(self.sigma_h - self.hausdorff) / max(abs(self.hausdorff), 1e-300)


def _default_nodes(n):
    return {2: (8, 12, 16), 3: (6, 7, 8)}.get(n, (4, 5, 6))


def cylinder_perimeter_check(param, n, box, spec=None, nodes=None):
    """Horizontal perimeter and Hausdorff measure of a parametrised window.

    For ``n == 1`` the adaptive 2-D rule is used; for larger n a tensor
    Gauss-Legendre rule, refined over ``nodes`` until consecutive values
    agree, with the last change reported.  Both measures always share one
    rule, so their difference reflects the densities alone.
    """
    if n == 1:
        def both(u, v):
            W, N, _ = measure_densities(param, 1, [u, v])
            return np.stack([W, N])

        res = quadrature.integrate_2d(both, box[0], box[1], spec)
        return PerimeterCheck(float(res.value[0]), float(res.value[1]), res.nevals,
                              float(res.error))

    def both(*U):
        W, N, _ = measure_densities(param, n, U)
        return np.stack([W, N])

    prev = None
    for k in nodes or _default_nodes(n):
        s, a = quadrature.gauss_legendre_box(both, box, k, chunk=50_000)
        change = math.inf if prev is None else abs(a - prev)
        prev = a
        if change < 1e-11 * abs(a):
            break
    return PerimeterCheck(float(s), float(a), k ** len(box), change)


def sphere_patch(n, R):
    """Hyperspherical coordinates on ``|z| = R`` times the t axis.

    Parameters ``(phi_1..phi_{2n-1}, t)``; the area element of the sphere
    is ``R^{2n-1} prod_k sin(phi_k)^{2n-1-k}``.
    """
    from . import jets

    m = 2 * n

    def param(*P):
        ang, t = P[: m - 1], P[m - 1]
        coords = []
        prod = None
        for a in ang:
            c = jets.cos(a)
            coords.append(R * (c if prod is None else prod * c))
            s = jets.sin(a)
            prod = s if prod is None else prod * s
        coords.append(R * prod)
        return (*coords, t)

    return param


def sphere_patch_area(n, R, box):
    """Closed-form measure of a :func:`sphere_patch` window."""
    from scipy.integrate import quad

    m = 2 * n
    total = R ** (m - 1)
    for k, (lo, hi) in enumerate(box[: m - 1]):
        e = m - 2 - k
        total *= quad(lambda a: math.sin(a) ** e, lo, hi, epsabs=0, epsrel=1e-13)[0]
    lo, hi = box[m - 1]
    return total * (hi - lo)


# the unit field of the negative example

def negative_example_nu(f, n, point):
    """Unit horizontal normal of ``y_n = f(x, y')`` and its horizontal
    divergence at ``point`` (2n coordinates, t irrelevant).

    ``nu = (-f_x, -f_y', 1) / sqrt(1 + |grad f|^2)``.  Its horizontal
    divergence is minus the minimal-surface operator of f, so it vanishes
    exactly when the graph of f is minimal in R^2n.
    """
    C = graph_cylinder(n, f)
    pt = [np.asarray(c, float) for c in point][: 2 * n]
    Z = Jet.variables(pt, 2)
    hj = _lift(C.h(*Z), Z[0])
    m = 2 * n
    g = [hj.diff(i) for i in range(m)]
    W2 = g[0] * g[0]
    for c in g[1:]:
        W2 = W2 + c * c
    inv = W2 ** -0.5
    nu = [gi * inv for gi in g]
    div = sum(nu[i].deriv(i) for i in range(m))
    return np.stack([v.value for v in nu]), div
