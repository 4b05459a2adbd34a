"""Surface representations.

A surface is available through one or more of

* a parametric patch ``(u, v) -> (x, y, t)`` (:class:`ParamPatch`),
* an ambient defining function whose zero set is the surface
  (:class:`DefiningFn`),
* an intrinsic X1-graph description (:class:`IntrinsicGraph`).

Patches and defining functions are evaluated on jets, so derivatives of any
order up to three come for free.  Orientation: for every constructor here the
patch normal ``theta_u x theta_v`` (expressed in the left-invariant frame)
points the same way as the frame gradient of the defining function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .gexpr import ScalarFn, as_function, parse
from .hgroup import EuclideanPlane
from .jets import Jet, UFunc, solve_jet

DEFAULT_WINDOW = (-8.0, 8.0)
EPS_STRICT = 1e-9
G_SLOPE_TOL = 1e-12


class NotApplicable(ValueError):
    """A precondition of an operation does not hold for this input."""


class NotGraphicalStrip(NotApplicable):
    """The profile G decreases somewhere on the interval."""


def _lift(value, like):
    if isinstance(value, Jet):
        return value
    return like.like(np.broadcast_to(np.asarray(value, float), like.shape))


@dataclass(frozen=True)
class ParamPatch:
    """A map ``(u, v) -> (x, y, t)`` defined through jets."""

    fn: Callable
    domain: tuple
    name: str = "patch"

    def evaluate(self, u, v, order=1):
        U, V = Jet.variables([u, v], order)
        x, y, t = self.fn(U, V)
        return _lift(x, U), _lift(y, U), _lift(t, U)

    def point(self, u, v):
        x, y, t = self.evaluate(u, v, 0)
        return x.value, y.value, t.value

    def __call__(self, u, v):
        return self.point(u, v)

    def with_domain(self, domain):
        return ParamPatch(self.fn, tuple(map(tuple, domain)), self.name)


@dataclass(frozen=True)
class DefiningFn:
    """Ambient function ``phi(x, y, t)`` with the surface as zero set."""

    fn: Callable

    def __call__(self, x, y, t):
        return self.fn(x, y, t)

    def evaluate(self, x, y, t, order=2):
        X, Y, T = Jet.variables([x, y, t], order)
        return _lift(self.fn(X, Y, T), X), (X, Y, T)


@dataclass(frozen=True)
class IntrinsicGraph:
    """Intrinsic X1-graph: ``(u, v) -> (phi, u, v - u phi / 2)``."""

    phi: Callable
    contains: Callable
    description: dict = field(default_factory=dict)

    def patch(self, domain):
        def fn(U, V):
            p = self.phi(U, V)
            return p, U, V - U * p / 2

        return ParamPatch(fn, domain, "intrinsic")

    def evaluate(self, u, v, order=2):
        U, V = Jet.variables([u, v], order)
        return _lift(self.phi(U, V), U)


@dataclass(frozen=True)
class Surface:
    """Container tying a patch, a defining function and metadata together."""

    kind: str
    patch: ParamPatch | None = None
    defining: DefiningFn | None = None
    params: dict = field(default_factory=dict)

    def describe(self):
        return {"kind": self.kind, **{k: _jsonable(v) for k, v in self.params.items()}}


def _jsonable(v):
    if isinstance(v, ScalarFn):
        return v.source
    if isinstance(v, UFunc):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# graphical strips

def _shrink(lo, hi, window):
    lo2 = max(lo, window[0])
    hi2 = min(hi, window[1])
    if not lo2 < hi2:
        raise NotApplicable("interval does not meet the window")
    pad = 1e-9 * (hi2 - lo2)
    if lo2 == lo and math.isfinite(lo):
        lo2 += pad
    if hi2 == hi and math.isfinite(hi):
        hi2 -= pad
    return lo2, hi2


def _strict_window(G, lo, hi, eps, samples=4097):
    """Longest sub-interval of (lo, hi) with G' > eps, endpoints refined."""
    t = np.linspace(lo, hi, samples)
    d = _safe_derivative(G, t)
    pos = d > eps
    if not np.any(pos):
        return None
    edges = np.diff(np.concatenate([[0], pos.astype(int), [0]]))
    starts, ends = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1
    k = int(np.argmax(ends - starts))
    i0, i1 = int(starts[k]), int(ends[k])

    def refine(a, b, inside_at_b):
        for _ in range(60):
            m = 0.5 * (a + b)
            if (_safe_derivative(G, np.array([m]))[0] > eps) == inside_at_b:
                b = m
            else:
                a = m
        return b

    a = lo if i0 == 0 else refine(t[i0 - 1], t[i0], True)
    b = hi if i1 == len(t) - 1 else refine(t[i1 + 1], t[i1], True)
    return (float(a), float(b))


def _safe_derivative(G, t):
    try:
        return np.asarray(G.derivs(t, 1)[1], float)
    except jets.DomainError:
        out = np.full(np.shape(t), -np.inf)
        for i, ti in enumerate(np.atleast_1d(t)):
            try:
                out[i] = G.derivs(np.array([ti]), 1)[1][0]
            except jets.DomainError:
                pass
        return out


@dataclass(frozen=True)
class GraphicalStrip:
    """``x = y G(t)`` (branch 'X') or ``y = -x G(t)`` (branch 'Y'), t in I."""

    G: UFunc
    interval: tuple
    branch: str = "X"
    strict_window: tuple | None = None
    window: tuple = DEFAULT_WINDOW
    y_window: tuple = DEFAULT_WINDOW
    kind: str = "strip"

    @property
    def is_strict(self):
        return self.strict_window is not None

    @property
    def t_range(self):
        return _shrink(*self.interval, self.window)

    @property
    def patch(self):
        return strip_patch(self)

    @property
    def defining(self):
        return strip_defining(self)

    @property
    def params(self):
        return {"G": self.G, "I": list(self.interval), "branch": self.branch}

    def describe(self):
        return {
            "kind": "strip",
            "G": _jsonable(self.G),
            "I": [_jsonable(float(v)) for v in self.interval],
            "branch": self.branch,
            "strict_window": None if self.strict_window is None else list(self.strict_window),
        }


def strip_new(G, interval=(-math.inf, math.inf), branch="X", eps_strict=EPS_STRICT,
              window=DEFAULT_WINDOW, y_window=DEFAULT_WINDOW):
    """Graphical strip with profile ``G`` on the open interval ``interval``.

    The strict window is the longest sub-interval of ``interval`` (clipped to
    ``window``) on which ``G' > eps_strict``.  A profile that decreases
    somewhere on the sampled interval is rejected.
    """
    G = as_function(G, ("t",))
    lo, hi = (float(v) for v in interval)
    if not lo < hi:
        raise ValueError("strip interval must be non-empty")
    if branch not in ("X", "Y"):
        raise ValueError("branch must be 'X' or 'Y'")
    a, b = _shrink(lo, hi, window)
    slope = _safe_derivative(G, np.linspace(a, b, 4097))
    if np.any(slope < -G_SLOPE_TOL):
        i = int(np.argmin(slope))
        raise NotGraphicalStrip(f"G' = {slope[i]:.3g} < 0 at t = {np.linspace(a, b, 4097)[i]:.6g}")
    J = _strict_window(G, a, b, eps_strict)
    if J is not None:
        J = (lo if J[0] == a and a - 1e-6 * (b - a) <= lo else J[0],
             hi if J[1] == b and b + 1e-6 * (b - a) >= hi else J[1])
    return GraphicalStrip(G, (lo, hi), branch, J, tuple(window), tuple(y_window))


def strip_patch(S, y_window=None, t_window=None):
    G = S.G
    ywin = tuple(y_window or S.y_window)
    twin = tuple(t_window or S.t_range)
    if not (S.interval[0] <= twin[0] < twin[1] <= S.interval[1]):
        raise ValueError(f"t range {twin} is not inside the strip interval {S.interval}")
    if S.branch == "X":
        def fn(U, V):
            return U * G(V), U, V
    else:
        def fn(U, V):
            return U, -U * G(V), V
    return ParamPatch(fn, (ywin, twin), f"strip-{S.branch}")


def strip_defining(S):
    G = S.G
    if S.branch == "X":
        return DefiningFn(lambda x, y, t: x - y * G(t))
    # sign chosen so that the (x, t) patch and this gradient agree
    return DefiningFn(lambda x, y, t: -(y + x * G(t)))


def _bisect_roots(F, target, lo, hi, iters=200):
    """Vectorised bisection for increasing ``F`` with ``F(lo) <= target <= F(hi)``."""
    lo = np.broadcast_to(np.asarray(lo, float), np.shape(target)).copy()
    hi = np.broadcast_to(np.asarray(hi, float), np.shape(target)).copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = F(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _limit_points(lo, hi):
    """Usable evaluation points near the ends of (lo, hi)."""
    span = hi - lo if math.isfinite(hi - lo) else 1.0
    a = lo + 1e-12 * max(span, 1.0) if math.isfinite(lo) else -1e8
    b = hi - 1e-12 * max(span, 1.0) if math.isfinite(hi) else 1e8
    return a, b


def strip_to_intrinsic(S):
    """Intrinsic X1-graph description of an X- or Y-form strip.

    ``Phi(y, t) = (y, t + y^2 G(t) / 2)`` is inverted numerically and the
    graph function is ``phi(u, v) = u G(Psi_2(u, v))``.  Y-form strips are
    first rotated by a quarter turn about the t axis, which turns them into
    the X-form strip with the same G.
    """
    G = S.G
    lo, hi = S.interval
    a, b = _limit_points(lo, hi)

    def G_safe(t):
        with np.errstate(all="ignore"):
            return np.asarray(G(t), float)

    def F(u, t):
        return t + 0.5 * u * u * G_safe(t)

    # G is increasing, so F(u, .) runs to -inf / +inf at infinite ends
    samples = np.linspace(a if math.isfinite(lo) else -50, b if math.isfinite(hi) else 50, 2001)
    if np.any(_safe_derivative(G, samples) < 0):
        raise NotApplicable("Phi is not monotone: G' changes sign on the interval")

    def contains(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        ok = np.ones(u.shape, bool)
        if math.isfinite(lo):
            ok &= F(u, np.full(u.shape, a)) < v
        if math.isfinite(hi):
            ok &= v < F(u, np.full(u.shape, b))
        return ok

    def bracket(u, v):
        ta = np.full(u.shape, a if math.isfinite(lo) else -1.0)
        tb = np.full(u.shape, b if math.isfinite(hi) else 1.0)
        for _ in range(80):
            grow = (F(u, ta) > v) if not math.isfinite(lo) else np.zeros(u.shape, bool)
            if not np.any(grow):
                break
            ta = np.where(grow, 2 * ta, ta)
        for _ in range(80):
            grow = (F(u, tb) < v) if not math.isfinite(hi) else np.zeros(u.shape, bool)
            if not np.any(grow):
                break
            tb = np.where(grow, 2 * tb, tb)
        return ta, tb

    def solve_t(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        if not np.all(contains(u, v)):
            raise NotApplicable("point outside the intrinsic domain Omega")
        ta, tb = bracket(u, v)
        return _bisect_roots(lambda t: F(u, t), v, ta, tb)

    G1 = G.derivative(1)

    def phi(U, V):
        u, v = U.value, V.value
        t0 = solve_t(u, v)
        slope = 1 + 0.5 * u * u * np.asarray(G1.derivs(t0, 0)[0])
        T = solve_jet(lambda T: T + 0.5 * U * U * G(T) - V, U.like(t0), slope, U.order + 1)
        return U * G(T)

    desc = {
        "map": "Phi(y,t) = (y, t + y^2 G(t)/2)",
        "interval": [float(lo), float(hi)],
        "u0_v_range": [float(lo), float(hi)],
    }
    return IntrinsicGraph(phi, contains, desc)


# other surfaces

def graph_xy_new(f, window=((-2.0, 2.0), (-2.0, 2.0))):
    """The graph ``t = f(x, y)``."""
    f = as_function(f, ("x", "y"))

    def fn(U, V):
        return U, V, f(U, V)

    patch = ParamPatch(fn, window, "graph-xy")
    defining = DefiningFn(lambda x, y, t: t - f(x, y))
    return Surface("graph-xy", patch, defining, {"f": f})


def graph_yt_new(psi, window=((-2.0, 2.0), (-2.0, 2.0))):
    """The graph ``x = psi(y, t)``."""
    psi = as_function(psi, ("y", "t"))

    def fn(U, V):
        return psi(U, V), U, V

    patch = ParamPatch(fn, window, "graph-yt")
    defining = DefiningFn(lambda x, y, t: x - psi(y, t))
    return Surface("graph-yt", patch, defining, {"psi": psi})


def vertical_plane(a, b, gamma, window=((-2.0, 2.0), (-2.0, 2.0))):
    """The plane ``a x + b y = gamma``; patch ``(u, v) -> (p0 + u d, v)``."""
    norm = math.hypot(a, b)
    if norm == 0:
        raise ValueError("vertical plane needs (a, b) != 0")
    d1, d2 = -b / norm, a / norm
    px, py = gamma * a / norm**2, gamma * b / norm**2

    def fn(U, V):
        return px + d1 * U, py + d2 * U, V

    patch = ParamPatch(fn, window, "vertical-plane")
    defining = DefiningFn(lambda x, y, t: (a * x + b * y - gamma) / norm)
    return Surface("vertical-plane", patch, defining, {"a": a, "b": b, "gamma": gamma})


def plane_surface(plane: EuclideanPlane, window=((-2.0, 2.0), (-2.0, 2.0))):
    """Any Euclidean plane; non-vertical planes become graphs over (x, y)."""
    if plane.c == 0:
        return vertical_plane(plane.a, plane.b, plane.gamma, window)
    a, b, c, g = plane.a, plane.b, plane.c, plane.gamma

    def fn(U, V):
        return U, V, (g - a * U - b * V) / c

    patch = ParamPatch(fn, window, "plane")
    sign = 1.0 if c > 0 else -1.0
    defining = DefiningFn(lambda x, y, t: sign * (a * x + b * y + c * t - g))
    return Surface("plane", patch, defining, {"a": a, "b": b, "c": c, "gamma": g})


def type2_xygraph(a, b, x0=0.0, y0=0.0, t0=0.0, h0="0*s",
                  window=((-2.0, 2.0), (-2.0, 2.0))):
    """Entire H-minimal graph of the second kind, left-translated by g0.

    ``t = t0 - ab(X^2 - Y^2)/2 - (b^2 - a^2) X Y / 2 + h0(a X + b Y)
    + (x0 y - x y0) / 2`` with ``X = x - x0``, ``Y = y - y0`` and
    ``a^2 + b^2 = 1``.
    """
    if abs(a * a + b * b - 1) > 1e-12:
        raise ValueError("(a, b) must be a unit vector")
    h0 = as_function(h0, ("s",))

    def f(x, y):
        X, Y = x - x0, y - y0
        return (t0 - 0.5 * a * b * (X * X - Y * Y) - 0.5 * (b * b - a * a) * X * Y
                + h0(a * X + b * Y) + 0.5 * (x0 * y - x * y0))

    def fn(U, V):
        return U, V, f(U, V)

    patch = ParamPatch(fn, window, "type2-graph")
    defining = DefiningFn(lambda x, y, t: t - f(x, y))
    params = {"a": a, "b": b, "x0": x0, "y0": y0, "t0": t0, "h0": h0}
    return Surface("type2-graph", patch, defining, params)


def circle_cylinder(R, window=None):
    """The vertical cylinder ``x^2 + y^2 = R^2`` (arc length u, height v)."""
    window = window or ((0.0, 2 * math.pi * R), (-1.0, 1.0))

    def fn(U, V):
        return R * jets.cos(U / R), R * jets.sin(U / R), V

    patch = ParamPatch(fn, window, "cylinder")
    defining = DefiningFn(lambda x, y, t: (x * x + y * y - R * R) / (2 * R))
    return Surface("cylinder", patch, defining, {"R": R})


# seed curves

@dataclass(frozen=True)
class SeedData:
    """Unit-speed plane curve ``gamma`` with height ``h0`` on ``interval``."""

    gamma1: UFunc
    gamma2: UFunc
    h0: UFunc
    interval: tuple = (-1.0, 1.0)
    kind: str = "seed"
    samples: dict | None = field(default=None, compare=False, repr=False)

    def point(self, s):
        return self.gamma1(s), self.gamma2(s)

    def velocity(self, s):
        return self.gamma1.derivative(1)(s), self.gamma2.derivative(1)(s)


def _num(v):
    return repr(float(v)) if v >= 0 else f"(-{repr(float(-v))})"


def line_seed(x0, y0, a1, a2, h0="0*s", interval=(-1.0, 1.0)):
    n = math.hypot(a1, a2)
    a1, a2 = a1 / n, a2 / n
    g1 = parse(f"{_num(x0)} + {_num(a1)}*s", ("s",))
    g2 = parse(f"{_num(y0)} + {_num(a2)}*s", ("s",))
    return SeedData(g1, g2, as_function(h0, ("s",)), tuple(interval), "line")


def circle_seed(R, x0=0.0, y0=0.0, h0="0*s", interval=(-1.0, 1.0)):
    g1 = parse(f"{_num(x0)} + {_num(R)}*cos(s/{_num(R)})", ("s",))
    g2 = parse(f"{_num(y0)} + {_num(R)}*sin(s/{_num(R)})", ("s",))
    return SeedData(g1, g2, as_function(h0, ("s",)), tuple(interval), "circle")


def seed_surface(seed, r_range=(-1.0, 1.0)):
    """Ruled surface swept by horizontal lines orthogonal to the seed.

    ``F(s, r) = (gamma + r gamma'^perp, h0(s) - r gamma.gamma' / 2)`` with
    ``(v1, v2)^perp = (v2, -v1)``.
    """
    g1, g2, h0 = seed.gamma1, seed.gamma2, seed.h0
    d1, d2 = g1.derivative(1), g2.derivative(1)

    def fn(S, R):
        a, b = g1(S), g2(S)
        da, db = d1(S), d2(S)
        return a + R * db, b - R * da, h0(S) - 0.5 * R * (a * da + b * db)

    return ParamPatch(fn, (tuple(seed.interval), tuple(r_range)), "seed")


def seed_points(gamma, dgamma, h0, r):
    """Pointwise version of :func:`seed_surface` for sampled seeds."""
    (g1, g2), (d1, d2) = gamma, dgamma
    return g1 + r * d2, g2 - r * d1, h0 - 0.5 * r * (g1 * d1 + g2 * d2)


def seed_frame(seed, s, r):
    """Closed-form frame data of a seed surface.

    Returns ``(p, q, omega, W)`` where with
    ``kappa = gamma''.gamma'^perp`` and
    ``B = h0' - r + r^2 kappa / 2 + gamma'.gamma^perp / 2``:
    ``p = gamma1' B``, ``q = gamma2' B``, ``omega = -(1 - r kappa)``, ``W = |B|``.
    """
    s = np.asarray(s, float)
    r = np.asarray(r, float)
    g1 = seed.gamma1.derivs(s, 2)
    g2 = seed.gamma2.derivs(s, 2)
    dh = seed.h0.derivs(s, 1)[1]
    kappa = g1[2] * g2[1] - g2[2] * g1[1]
    cross = g1[1] * g2[0] - g2[1] * g1[0]
    B = dh - r + 0.5 * r * r * kappa + 0.5 * cross
    return g1[1] * B, g2[1] * B, -(1 - r * kappa), np.abs(B)
