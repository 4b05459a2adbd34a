"""Seed curves, ruled H-minimal surfaces and the reduction to strips.

An H-minimal graph ``t = f(x, y)`` without characteristic points is swept by
horizontal lines orthogonal to its seed curves, the integral curves of

    nu(x, y) = -(f_x + y/2, f_y - x/2) / |(f_x + y/2, f_y - x/2)|.

For entire graphs over the (y, t)-plane the seeds are lines or circles.
:func:`extract_strip` runs the reduction: local (x, y)-graph, seed trace,
classification, centring, and inversion of the height along the circle,
which yields a strict graphical strip ``x = y G(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.interpolate import CubicHermiteSpline

from .hcalc import EPS_CHAR, frame_from_defining, hmean_defining
from .hgroup import GroupPoint, ambient_to_frame
from .jets import Jet, UFunc, solve_jet
from .surfaces import NotApplicable, SeedData, Surface, _lift, strip_new


class TraceError(NotApplicable):
    """The seed trace hit a characteristic point or left the graph domain."""


class NotAGraph(NotApplicable):
    """The seed data cannot come from an entire graph over the (y, t)-plane."""


class ReductionError(NotApplicable):
    """A stage of :func:`extract_strip` rejected the input."""

    def __init__(self, stage, message, trace=None, details=None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.trace = trace or []
        self.details = details or {}


# local (x, y)-graphs

class XYGraph:
    """Interface: ``solve(x, y, guess) -> (f, f_x, f_y)`` plus jets."""

    def solve(self, x, y, guess=None):
        raise NotImplementedError

    def jet(self, X, Y, guess=None):
        raise NotImplementedError

    def seed_field(self, x, y, guess=None, eps_char=EPS_CHAR):
        """Unit field ``nu`` at (x, y), the height and W."""
        f, fx, fy = self.solve(x, y, guess)
        a, b = fx + 0.5 * y, fy - 0.5 * x
        W = np.hypot(a, b)
        if np.any(W <= eps_char * (1 + np.hypot(W, 1.0))):
            raise TraceError("characteristic point on the seed trace")
        return np.array([-a / W, -b / W]), f, W


class ExplicitXYGraph(XYGraph):
    def __init__(self, f):
        self.f = f

    def solve(self, x, y, guess=None):
        X, Y = Jet.variables([x, y], 1)
        j = _lift(self.f(X, Y), X)
        if not np.all(np.isfinite(j.c)):
            raise TraceError("left the domain of f")
        return j.value, j.deriv(0), j.deriv(1)

    def jet(self, X, Y, guess=None):
        return _lift(self.f(X, Y), X)


class ImplicitXYGraph(XYGraph):
    """``t = f(x, y)`` solving ``psi(y, t) = x`` by Newton's method near a
    point where ``psi_t`` is bounded away from zero."""

    def __init__(self, psi, guess, min_slope):
        self.psi = psi
        self.guess = float(guess)
        self.min_slope = float(min_slope)

    def _psi(self, y, t, order=1):
        Y, T = Jet.variables([y, t], order)
        return _lift(self.psi(Y, T), Y)

    def height(self, x, y, guess=None):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        t = np.broadcast_to(np.asarray(self.guess if guess is None else guess, float),
                            x.shape).copy()
        for _ in range(80):
            with np.errstate(all="ignore"):
                j = self._psi(y, t)
            slope = j.deriv(1)
            if not np.all(np.isfinite(j.c)) or np.any(np.abs(slope) < self.min_slope):
                raise TraceError("psi_t too small: left the local graph domain")
            step = (j.value - x) / slope
            t = t - step
            if np.all(np.abs(step) <= 4e-16 * (1 + np.abs(t))):
                break
        j = self._psi(y, t)
        if np.any(np.abs(j.value - x) > 1e-11 * (1 + np.abs(x))):
            raise TraceError("implicit solve did not converge")
        return t, j

    def solve(self, x, y, guess=None):
        t, j = self.height(x, y, guess)
        pt, py = j.deriv(1), j.deriv(0)
        return t, 1.0 / pt, -py / pt

    def jet(self, X, Y, guess=None):
        t0, j = self.height(X.value, Y.value, guess)
        return solve_jet(lambda T: self.psi(Y, T) - X, X.like(t0), j.deriv(1), X.order + 1)


def as_xy_graph(surface):
    if isinstance(surface, XYGraph):
        return surface
    if isinstance(surface, Surface) and "f" in surface.params:
        return ExplicitXYGraph(surface.params["f"])
    raise TypeError("seed_trace needs a graph t = f(x, y)")


# seed tracing

class _Hermite(UFunc):
    """Cubic Hermite interpolant of sampled values and slopes."""

    def __init__(self, s, values, slopes):
        self.spline = CubicHermiteSpline(s, values, slopes)

    def derivs(self, x, n):
        x = np.asarray(x, float)
        out = [self.spline(x, nu=j) for j in range(min(n, 3) + 1)]
        return out + [np.zeros(x.shape)] * (n - len(out) + 1)


def _rk4(F, z, h):
    k1 = F(z)
    k2 = F(z + 0.5 * h * k1)
    k3 = F(z + 0.5 * h * k2)
    k4 = F(z + h * k3)
    return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _trace_one_way(graph, z0, t0, s_end, step, tol, min_step, eps_char, on_exit):
    state = {"t": t0}

    def F(z):
        nu, t, _ = graph.seed_field(z[0], z[1], state["t"], eps_char)
        return nu

    s, z, h = 0.0, np.asarray(z0, float), step
    pts = []
    sign = 1.0 if s_end >= 0 else -1.0
    while sign * (s_end - s) > 1e-14:
        h = min(h, abs(s_end - s))
        try:
            full = _rk4(F, z, sign * h)
            half = _rk4(F, _rk4(F, z, sign * h / 2), sign * h / 2)
            err = float(np.hypot(*(full - half)))
        except TraceError:
            if h > min_step:
                h /= 2
                continue
            if on_exit == "truncate":
                break
            raise
        if err > tol * h and h > min_step:
            h /= 2
            continue
        z = half + (half - full) / 15
        s += sign * h
        try:
            _, t, _ = graph.seed_field(z[0], z[1], state["t"], eps_char)
        except TraceError:
            if on_exit == "truncate":
                break
            raise
        state["t"] = float(t)
        pts.append((s, z.copy(), float(t)))
        if err < tol * h / 64:
            h = min(2 * h, step)
    return pts


def seed_trace(surface, z, s_range=(-1.0, 1.0), step=0.05, tol=1e-10, min_step=1e-6,
               eps_char=EPS_CHAR, on_exit="raise"):
    """Integral curve of ``nu`` through ``z``, traced by RK4 with step halving.

    Returns :class:`SeedData` whose curve and height are cubic Hermite
    interpolants of the accepted samples (kept in ``samples``).  With
    ``on_exit='truncate'`` the trace stops where it meets a characteristic
    point or leaves the graph domain instead of raising.
    """
    graph = as_xy_graph(surface)
    z = np.asarray(z, float)
    _, t0, _ = graph.seed_field(z[0], z[1], None, eps_char)
    t0 = float(t0)
    back = _trace_one_way(graph, z, t0, s_range[0], step, tol, min_step, eps_char, on_exit)
    fwd = _trace_one_way(graph, z, t0, s_range[1], step, tol, min_step, eps_char, on_exit)
    pts = back[::-1] + [(0.0, z, t0)] + fwd
    s = np.array([p[0] for p in pts])
    gam = np.array([p[1] for p in pts]).T
    guess = np.array([p[2] for p in pts])
    nu, h0, W = graph.seed_field(gam[0], gam[1], guess, eps_char)
    _, fx, fy = graph.solve(gam[0], gam[1], h0)
    dh0 = fx * nu[0] + fy * nu[1]
    samples = {"s": s, "gamma": gam, "dgamma": nu, "h0": h0, "dh0": dh0, "W": W}
    interval = (float(s[0]), float(s[-1]))
    if len(s) < 2:
        raise TraceError("trace has no extent")
    return SeedData(_Hermite(s, gam[0], nu[0]), _Hermite(s, gam[1], nu[1]),
                    _Hermite(s, h0, dh0), interval, "traced", samples)


def reference_trace(surface, z, s_eval, rtol=1e-12, atol=1e-13):
    """High-accuracy reference for :func:`seed_trace` via scipy's DOP853."""
    from scipy.integrate import solve_ivp

    graph = as_xy_graph(surface)

    def rhs(_, zz):
        return graph.seed_field(zz[0], zz[1])[0]

    s_eval = np.asarray(s_eval, float)
    out = np.empty((2, len(s_eval)))
    for mask, sign in ((s_eval >= 0, 1), (s_eval < 0, -1)):
        if not np.any(mask):
            continue
        idx = np.flatnonzero(mask)
        idx = idx[np.argsort(sign * s_eval[idx])]
        ss = s_eval[idx]
        sol = solve_ivp(rhs, (0.0, ss[-1]), z, method="DOP853", t_eval=ss, rtol=rtol, atol=atol)
        out[:, idx] = sol.y
    return out


# seed geometry

def _seed_values(seed, s, order=1):
    s = np.asarray(s, float)
    g1 = seed.gamma1.derivs(s, order)
    g2 = seed.gamma2.derivs(s, order)
    return g1, g2


def coplanarity_residual(seed, s):
    """``(g1'(0) (g . g')(s) - g1'(s) (g . g')(0)) / 2``.

    Zero on the whole seed interval is necessary for the rules to have
    pairwise disjoint projections on the (y, t)-plane.
    """
    g1, g2 = _seed_values(seed, s)
    a1, a2 = _seed_values(seed, 0.0)
    dot_s = g1[0] * g1[1] + g2[0] * g2[1]
    dot_0 = a1[0] * a1[1] + a2[0] * a2[1]
    return 0.5 * (a1[1] * dot_s - g1[1] * dot_0)


@dataclass
class RuleLine:
    base: tuple
    direction: tuple
    frame: tuple

    def point(self, r):
        return tuple(b + r * d for b, d in zip(self.base, self.direction))


def rule_line(seed, s):
    """Horizontal line of the seed surface through ``(gamma(s), h0(s))``."""
    g1, g2 = _seed_values(seed, s)
    h = float(seed.h0(np.asarray(s, float)))
    base = (float(g1[0]), float(g2[0]), h)
    direction = (float(g2[1]), float(-g1[1]), float(-0.5 * (g1[0] * g1[1] + g2[0] * g2[1])))
    fv = ambient_to_frame(base, direction)
    return RuleLine(base, direction, tuple(float(c) for c in fv))


class _Affine(UFunc):
    """``const + sum coef * fn``."""

    def __init__(self, const, terms):
        self.const = float(const)
        self.terms = [(float(c), f) for c, f in terms if c != 0]

    def derivs(self, x, n):
        x = np.asarray(x, float)
        out = [np.zeros(x.shape) for _ in range(n + 1)]
        out[0] = out[0] + self.const
        for c, f in self.terms:
            for j, d in enumerate(f.derivs(x, n)):
                out[j] = out[j] + c * d
        return out


def translate_seed(g0, seed):
    """Seed data of ``g0 o S`` when ``seed`` generates ``S``.

    ``gamma -> gamma + (x0, y0)``, ``h0 -> h0 + t0 + (x0 gamma2 - y0 gamma1)/2``.
    """
    g0 = g0 if isinstance(g0, GroupPoint) else GroupPoint(*g0)
    x0, y0, t0 = g0.x, g0.y, g0.t
    g1 = _Affine(x0, [(1.0, seed.gamma1)])
    g2 = _Affine(y0, [(1.0, seed.gamma2)])
    h0 = _Affine(t0, [(1.0, seed.h0), (0.5 * x0, seed.gamma2), (-0.5 * y0, seed.gamma1)])
    samples = None
    if seed.samples is not None:
        sm = dict(seed.samples)
        gam = sm["gamma"]
        dg = sm["dgamma"]
        sm["h0"] = sm["h0"] + t0 + 0.5 * x0 * gam[1] - 0.5 * y0 * gam[0]
        sm["dh0"] = sm["dh0"] + 0.5 * x0 * dg[1] - 0.5 * y0 * dg[0]
        sm["gamma"] = gam + np.array([[x0], [y0]])
        samples = sm
    return SeedData(g1, g2, h0, seed.interval, seed.kind, samples)


def line_seed_characteristic(seed, s=0.0):
    """``r*`` where the rule through ``gamma(s)`` of a line seed meets the
    characteristic locus: ``r* = h0'(s) + (a1 y0 - a2 x0)/2``."""
    g1, g2 = _seed_values(seed, s)
    a1, a2 = float(g1[1]), float(g2[1])
    x0, y0 = float(g1[0]) - s * a1, float(g2[0]) - s * a2
    dh = float(seed.h0.derivs(np.asarray(s, float), 1)[1])
    return dh + 0.5 * (a1 * y0 - a2 * x0)


# classification

@dataclass
class SeedClassification:
    kind: str
    params: dict
    residuals: dict
    coplanarity: float
    entire_graph_condition: bool

    def to_json(self):
        return {"kind": self.kind, "params": self.params, "residuals": self.residuals,
                "coplanarity": self.coplanarity,
                "entire_graph_condition": self.entire_graph_condition}


def _seed_samples(seed, J, n=201):
    if seed.samples is not None:
        sm = seed.samples
        s = sm["s"]
        keep = np.ones(len(s), bool) if J is None else (s >= J[0] - 1e-12) & (s <= J[1] + 1e-12)
        return s[keep], sm["gamma"][:, keep], sm["dgamma"][:, keep]
    lo, hi = J or seed.interval
    s = np.linspace(lo, hi, n)
    g1, g2 = _seed_values(seed, s)
    return s, np.array([g1[0], g2[0]]), np.array([g1[1], g2[1]])


def _line_fit(s, g, dg):
    a = dg.mean(axis=1)
    a = a / np.hypot(*a)
    base = (g - np.outer(a, s)).mean(axis=1)
    res = float(np.max(np.abs(g - base[:, None] - np.outer(a, s))))
    return {"a1": float(a[0]), "a2": float(a[1]), "x0": float(base[0]),
            "y0": float(base[1])}, res


def _circle_fit(g):
    A = np.column_stack([g[0], g[1], np.ones(g.shape[1])])
    b = -(g[0] ** 2 + g[1] ** 2)
    (D, E, F), *_ = np.linalg.lstsq(A, b, rcond=None)
    cx, cy = -D / 2, -E / 2
    R = math.sqrt(max(cx * cx + cy * cy - F, 0.0))
    res = float(np.max(np.abs(np.hypot(g[0] - cx, g[1] - cy) - R)))
    return {"center": [float(cx), float(cy)], "radius": R}, res


def classify_seed(seed, J=None, tol=None):
    """Line or circle, following the entire-graph case analysis.

    * ``gamma1' == 0`` on J: line;
    * ``gamma . gamma' == 0`` on J: circle centred at the origin;
    * both vanish at the reference point only: :class:`NotAGraph`;
    * otherwise ``C = gamma1'(0) / (gamma . gamma')(0)`` must satisfy
      ``gamma1' = C gamma . gamma'`` and ``|gamma|^2 = 2 gamma1 / C + C0``,
      giving a circle of centre (1/C, 0) and radius^2 ``1/C^2 + C0``.

    Seeds that fail the entire-graph condition (non-zero coplanarity
    residual) are still classified geometrically by direct line and circle
    fits, with ``entire_graph_condition`` false.
    """
    s, g, dg = _seed_samples(seed, J)
    scale = 1.0 + float(np.max(np.abs(g)))
    tol = 1e-7 * scale if tol is None else tol
    i0 = int(np.argmin(np.abs(s)))
    dot = g[0] * dg[0] + g[1] * dg[1]
    cop = 0.5 * (dg[0, i0] * dot - dg[0] * dot[i0])
    cop_res = float(np.max(np.abs(cop)))
    entire = cop_res < tol
    res = {"line": float(np.max(np.abs(dg[0]))), "origin_circle": float(np.max(np.abs(dot)))}
    s_ref = float(s[i0])

    if entire:
        if res["line"] < tol:
            params, fit = _line_fit(s, g, dg)
            res["line_fit"] = fit
            return SeedClassification("line", params, res, cop_res, True)
        if res["origin_circle"] < tol:
            R = float(np.mean(np.hypot(g[0], g[1])))
            res["radius_spread"] = float(np.max(np.abs(np.hypot(g[0], g[1]) - R)))
            params = {"C": None, "C0": R * R, "center": [0.0, 0.0], "radius": R,
                      "branch": "orthogonal"}
            return SeedClassification("circle", params, res, cop_res, True)
        if abs(dg[0, i0]) < tol and abs(dot[i0]) < tol:
            raise NotAGraph("gamma1'(0) = 0 and gamma(0).gamma'(0) = 0: the rule through "
                            "gamma(0) projects to a point of the (y, t)-plane")
        if abs(dot[i0]) >= tol and abs(dg[0, i0]) >= tol:
            C = float(dg[0, i0] / dot[i0])
            res["eqa"] = float(np.max(np.abs(dg[0] - C * dot)))
            m = g[0] ** 2 + g[1] ** 2 - 2.0 / C * g[0]
            C0 = float(np.mean(m))
            res["eqb"] = float(np.max(np.abs(m - C0)))
            if res["eqa"] < tol and res["eqb"] < tol:
                r2 = 1.0 / C**2 + C0
                params = {"C": C, "C0": C0, "center": [1.0 / C, 0.0],
                          "radius": math.sqrt(max(r2, 0.0)), "branch": "general",
                          "s_ref": s_ref}
                return SeedClassification("circle", params, res, cop_res, True)

    lp, lres = _line_fit(s, g, dg)
    cp, cres = _circle_fit(g)
    res["line_fit"], res["circle_fit"] = lres, cres
    if lres < tol:
        return SeedClassification("line", lp, res, cop_res, entire)
    if cres < tol:
        cp.update({"C": None, "C0": None, "branch": "fit"})
        return SeedClassification("circle", cp, res, cop_res, entire)
    raise NotApplicable(f"seed is neither a line nor a circle (residuals {res})")


# reduction to a strip

class ChebProfile(UFunc):
    """Chebyshev interpolant used as a strip profile."""

    def __init__(self, cheb, label=""):
        self.cheb = cheb
        self._d = [cheb]
        self.label = label

    def derivs(self, x, n):
        while len(self._d) <= n:
            self._d.append(self._d[-1].deriv())
        x = np.asarray(x, float)
        return [self._d[j](x) for j in range(n + 1)]

    def __repr__(self):
        a, b = self.cheb.domain
        return f"ChebProfile({self.label}deg={self.cheb.degree()}, domain=[{a:.6g}, {b:.6g}])"


@dataclass
class Extraction:
    strip: object
    G: ChebProfile
    interval: tuple
    theta_window: tuple
    center: tuple
    radius: float
    probe: tuple
    seed: SeedData
    classification: SeedClassification
    trace: list = field(default_factory=list)
    interp_error: float = 0.0

    def describe(self):
        return {
            "strip": self.strip.describe(),
            "interval": list(self.interval),
            "theta_window": list(self.theta_window),
            "center": list(self.center),
            "radius": self.radius,
            "probe": list(self.probe),
            "interp_error": self.interp_error,
            "trace": self.trace,
        }


def _probe_grid(domain, n):
    (y0, y1), (t0, t1) = domain
    ys = np.linspace(y0, y1, n)
    ts = np.linspace(t0, t1, n)
    return np.meshgrid(ys, ts, indexing="ij")


def _circle_height(graph, center, R, theta, guess):
    """Height of the centred seed surface along the circle and its
    derivative in the angle."""
    cx, cy = center
    c, s = np.cos(theta), np.sin(theta)
    x, y = cx + R * c, cy + R * s
    f, fx, fy = graph.solve(x, y, guess)
    H = f + 0.5 * R * (cy * c - cx * s)
    dH = R * (-fx * s + fy * c) + 0.5 * R * (-cy * s - cx * c)
    return H, dH, f


def _window(theta_lo, theta_hi, margin):
    best = None
    for k in range(math.floor(theta_lo / math.pi) - 1, math.ceil(theta_hi / math.pi) + 1):
        lo = max(theta_lo, k * math.pi + margin)
        hi = min(theta_hi, (k + 1) * math.pi - margin)
        if hi > lo and (best is None or hi - lo > best[1] - best[0]):
            best = (lo, hi, k)
    return best


def extract_strip(surface, probe_domain=None, grid=9, trace_length=1.0, step=0.05,
                  hmin_tol=1e-6, margin=1e-3, degrees=(16, 32, 64, 128, 256)):
    """Reduce an H-minimal graph ``x = psi(y, t)`` to a strict graphical strip.

    Stages (each appended to the returned ``trace`` and named in
    :class:`ReductionError` on rejection): ``minimality``, ``psi_t``,
    ``trace``, ``classify``, ``characteristic`` (line seed), ``translate``,
    ``injectivity``, ``window``, ``invert``.
    """
    if not (isinstance(surface, Surface) and "psi" in surface.params):
        raise TypeError("extract_strip needs a graph x = psi(y, t) (graph_yt_new)")
    psi = surface.params["psi"]
    domain = probe_domain or surface.patch.domain
    trace = []

    def reject(stage, message, **details):
        trace.append({"stage": stage, "decision": "reject", "message": message, **details})
        raise ReductionError(stage, message, trace, details)

    # H-minimality and characteristic points on the probe grid
    Y, T = _probe_grid(domain, grid)
    X = psi(Y, T)
    fr = frame_from_defining(surface.defining, (X, Y, T))
    if np.any(fr.characteristic):
        i = np.argmin(fr.W)
        reject("minimality", "characteristic point on the probe grid",
               W=float(fr.W.flat[i]), point=[float(X.flat[i]), float(Y.flat[i]), float(T.flat[i])])
    H = hmean_defining(surface.defining, (X, Y, T))
    hmax = float(np.max(np.abs(H)))
    if hmax > hmin_tol:
        reject("minimality", "surface is not H-minimal on the probe grid", max_abs_H=hmax)
    trace.append({"stage": "minimality", "decision": "pass", "max_abs_H": hmax,
                  "points": int(H.size)})

    # psi_t != 0 somewhere (otherwise a vertical plane)
    YJ, TJ = Jet.variables([Y, T], 1)
    pj = _lift(psi(YJ, TJ), YJ)
    psi_t = np.abs(pj.deriv(1))
    scale = 1.0 + float(np.max(np.abs(pj.deriv(0))))
    interior = psi_t[1:-1, 1:-1] if grid > 2 else psi_t
    if float(np.max(psi_t)) <= 1e-9 * scale:
        reject("psi_t", "psi_t vanishes on the probe region: the surface is a vertical plane",
               max_abs_psi_t=float(np.max(psi_t)))
    i, j = np.unravel_index(np.argmax(interior), interior.shape)
    if grid > 2:
        i, j = i + 1, j + 1
    y0, t0 = float(Y[i, j]), float(T[i, j])
    x0 = float(X[i, j])
    slope0 = float(psi_t[i, j])
    trace.append({"stage": "psi_t", "decision": "pass", "probe": [x0, y0, t0],
                  "psi_t": slope0})

    # local graph and seed trace
    graph = ImplicitXYGraph(psi, t0, 0.05 * slope0)
    try:
        seed = seed_trace(graph, (x0, y0), (-trace_length, trace_length), step,
                          on_exit="truncate")
    except TraceError as e:
        reject("trace", str(e))
    sm = seed.samples
    trace.append({"stage": "trace", "decision": "pass", "s_range": list(seed.interval),
                  "samples": int(len(sm["s"])), "min_W": float(np.min(sm["W"]))})

    try:
        cls = classify_seed(seed)
    except NotApplicable as e:
        reject("classify", str(e))
    trace.append({"stage": "classify", "decision": cls.kind, **cls.to_json()})

    if cls.kind == "line":
        r_star = line_seed_characteristic(seed, 0.0)
        g = np.array([seed.gamma1(0.0), seed.gamma2(0.0)], float)
        dg = np.array([seed.gamma1.derivative(1)(0.0), seed.gamma2.derivative(1)(0.0)], float)
        px = g[0] + r_star * dg[1]
        py = g[1] - r_star * dg[0]
        pt = float(seed.h0(0.0)) - 0.5 * r_star * float(g @ dg)
        W = float(frame_from_defining(surface.defining, (px, py, pt)).W)
        resid = float(px - psi(py, pt))
        reject("characteristic",
               "line seed: the rule through gamma(0) meets the characteristic locus",
               r_star=r_star, W=W, point=[float(px), float(py), float(pt)],
               defining_residual=resid)
    if not cls.entire_graph_condition:
        reject("classify", "seed violates the entire-graph coplanarity condition",
               coplanarity=cls.coplanarity)

    cx, cy = cls.params["center"]
    R = float(cls.params["radius"])
    trace.append({"stage": "translate", "decision": "pass", "g0": [-cx, -cy, 0.0],
                  "y0": cy, "radius": R})

    # angles along the trace, heights of the centred surface
    th = np.unwrap(np.arctan2(sm["gamma"][1] - cy, sm["gamma"][0] - cx))
    orientation = "ccw" if th[-1] > th[0] else "cw"
    order = np.argsort(th)
    th_s, h_s = th[order], sm["h0"][order]
    win = _window(float(th_s[0]), float(th_s[-1]), margin)
    if win is None:
        reject("window", "trace too short to fit inside (k pi, (k+1) pi)")
    a, b, k = win
    shift = 2 * math.pi * math.floor((k + 1) / 2)
    dense = np.linspace(a, b, 401)
    guess = np.interp(dense, th_s, h_s)
    Hd, dHd, fd = _circle_height(graph, (cx, cy), R, dense, guess)
    if not np.all(dHd < 0):
        reject("injectivity", "height along the centred seed is not decreasing",
               max_dH=float(np.max(dHd)))
    trace.append({"stage": "injectivity", "decision": "pass", "orientation": orientation,
                  "max_dH": float(np.max(dHd))})
    trace.append({"stage": "window", "decision": "pass",
                  "theta": [a - shift, b - shift]})

    t_lo, t_hi = float(Hd[-1]), float(Hd[0])
    Hr, thr, fr_ = Hd[::-1], dense[::-1], fd[::-1]

    def theta_of(t):
        t = np.asarray(t, float)
        th_ = np.interp(t, Hr, thr)
        for _ in range(50):
            H_, dH_, _ = _circle_height(graph, (cx, cy), R, th_, np.interp(t, Hr, fr_))
            d = (H_ - t) / dH_
            th_ = np.clip(th_ - d, a, b)
            if np.all(np.abs(d) < 1e-15 * (1 + np.abs(th_))):
                break
        return th_

    def G_exact(t):
        return 1.0 / np.tan(theta_of(t))

    cheb, err = None, math.inf
    for deg in degrees:
        cheb = Chebyshev.interpolate(G_exact, deg, domain=[t_lo, t_hi])
        tm = np.linspace(t_lo, t_hi, 257)
        err = float(np.max(np.abs(cheb(tm) - G_exact(tm))))
        if err < 1e-11 * (1 + float(np.max(np.abs(cheb.coef)))):
            break
    tn = np.linspace(t_lo, t_hi, 257)
    thn = theta_of(tn)
    _, dHn, _ = _circle_height(graph, (cx, cy), R, thn, np.interp(tn, Hr, fr_))
    g1_formula = -(1 + 1 / np.tan(thn) ** 2) / dHn
    g1_cheb = cheb.deriv()(tn)
    if not np.all(g1_formula > 0):
        reject("invert", "G' is not positive", min_G1=float(np.min(g1_formula)))
    G = ChebProfile(cheb, "extracted, ")
    trace.append({"stage": "invert", "decision": "pass", "I": [t_lo, t_hi],
                  "degree": int(cheb.degree()), "interp_error": err,
                  "min_G1": float(np.min(g1_formula)),
                  "G1_mismatch": float(np.max(np.abs(g1_cheb - g1_formula)))})
    strip = strip_new(G, (t_lo, t_hi))
    return Extraction(strip, G, (t_lo, t_hi), (a - shift, b - shift), (cx, cy), R,
                      (x0, y0, t0), seed, cls, trace, err)
