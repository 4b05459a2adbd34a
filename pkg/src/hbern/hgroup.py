"""The Heisenberg group H^n in exponential coordinates.

Points are ``(x, y, t)`` with ``x, y`` in R^n and ``t`` real.  The group
law is

    (x, y, t) * (x', y', t') = (x + x', y + y', t + t' + (x.y' - x'.y) / 2)

and the horizontal frame is ``X_i = d/dx_i - y_i/2 d/dt``,
``X_{n+i} = d/dy_i + x_i/2 d/dt``, ``T = d/dt``.  All functions accept
scalars for H^1 or arrays whose last axis has length n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _vec(v):
    a = np.asarray(v, dtype=float)
    return a


def _dot(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.ndim == 0 or b.ndim == 0:
        return a * b
    return np.sum(a * b, axis=-1)


@dataclass(frozen=True)
class GroupPoint:
    x: object
    y: object
    t: float

    def __post_init__(self):
        x, y = _vec(self.x), _vec(self.y)
        if x.shape != y.shape:
            raise ValueError("x and y must have the same dimension")
        vals = [x, y, np.asarray(self.t, float)]
        if not all(np.all(np.isfinite(v)) for v in vals):
            raise ValueError("group point coordinates must be finite")

    @property
    def n(self):
        x = _vec(self.x)
        return 1 if x.ndim == 0 else x.shape[-1]

    def as_tuple(self):
        return (self.x, self.y, self.t)

    def __iter__(self):
        return iter(self.as_tuple())


def _point(g):
    if isinstance(g, GroupPoint):
        return g
    x, y, t = g
    return GroupPoint(x, y, t)


def _same(a, like):
    a = np.asarray(a, float)
    return float(a) if a.ndim == 0 and np.ndim(like) == 0 else a


def compose(g, h):
    """Group product ``g * h``."""
    g, h = _point(g), _point(h)
    if g.n != h.n:
        raise ValueError("points live in different groups")
    t = g.t + h.t + 0.5 * (_dot(g.x, h.y) - _dot(h.x, g.y))
    return GroupPoint(_same(_vec(g.x) + h.x, g.x), _same(_vec(g.y) + h.y, g.y), float(t))


def inverse(g):
    g = _point(g)
    return GroupPoint(_same(-_vec(g.x), g.x), _same(-_vec(g.y), g.y), -g.t)


def identity(n=1):
    if n == 1:
        return GroupPoint(0.0, 0.0, 0.0)
    return GroupPoint(np.zeros(n), np.zeros(n), 0.0)


def dilate(lam, g):
    """Anisotropic dilation ``(lam x, lam y, lam^2 t)``; needs ``lam > 0``."""
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    g = _point(g)
    return GroupPoint(_same(lam * _vec(g.x), g.x), _same(lam * _vec(g.y), g.y), lam * lam * g.t)


def rotate_z(theta, g):
    """Rotation of the (x, y) plane about the t axis (H^1), an isometry."""
    g = _point(g)
    c, s = np.cos(theta), np.sin(theta)
    return GroupPoint(c * g.x - s * g.y, s * g.x + c * g.y, g.t)


def homogeneous_dimension(n=1):
    return 2 * n + 2


def compose_arrays(x, y, t, x2, y2, t2):
    """Vectorised product in H^1 for coordinate arrays."""
    return x + x2, y + y2, t + t2 + 0.5 * (x * y2 - x2 * y)


@dataclass(frozen=True)
class FrameVector:
    """Coefficients of ``a X_1 + b X_2 + k T`` (H^1)."""

    a: float
    b: float
    k: float


def frame_ambient(g, v):
    """Ambient (d/dx, d/dy, d/dt) components of ``a X_1 + b X_2 + k T`` at g.

    Works for H^1 with scalar or array coordinates.  ``v`` is a FrameVector
    or an ``(a, b, k)`` triple.
    """
    if isinstance(v, FrameVector):
        a, b, k = v.a, v.b, v.k
    else:
        a, b, k = v
    x, y, _ = g.as_tuple() if isinstance(g, GroupPoint) else g
    return a, b, k - a * y / 2 + b * x / 2


def ambient_to_frame(g, w):
    """Inverse of :func:`frame_ambient`."""
    x, y, _ = g.as_tuple() if isinstance(g, GroupPoint) else g
    wx, wy, wt = w
    return wx, wy, wt + wx * y / 2 - wy * x / 2


@dataclass(frozen=True)
class EuclideanPlane:
    """The plane ``a x + b y + c t = gamma``."""

    a: float
    b: float
    c: float
    gamma: float

    def __post_init__(self):
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise ValueError("plane normal must be non-zero")

    def contains(self, g, tol=1e-12):
        g = _point(g)
        return abs(self.a * g.x + self.b * g.y + self.c * g.t - self.gamma) <= tol * (
            1 + abs(self.gamma)
        )


def translate_plane(g0, plane):
    """The plane ``g0 * plane`` as an EuclideanPlane."""
    x0, y0, t0 = _point(g0).as_tuple()
    a, b, c, gam = plane.a, plane.b, plane.c, plane.gamma
    return EuclideanPlane(a + c * y0 / 2, b - c * x0 / 2, c, gam + a * x0 + b * y0 + c * t0)


class NoCharacteristicPoint(ValueError):
    pass


def plane_characteristic_point(plane):
    """The unique point of the plane where it is tangent to the horizontal
    distribution; only exists when ``c != 0``."""
    if plane.c == 0:
        raise NoCharacteristicPoint("vertical plane has no characteristic point")
    a, b, c, gam = plane.a, plane.b, plane.c, plane.gamma
    return GroupPoint(-2 * b / c, 2 * a / c, gam / c)
