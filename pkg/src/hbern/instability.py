"""Instability certificates for strict graphical strips.

For a strip ``x = y G(t)`` with ``G' > 0`` near ``t = 0`` we use test
functions on the (y, t) plane

    f_k(y, t) = chi(y / k) chi(t) / sqrt(1 + y^2 G_k'(t) / 2),

where ``chi`` is a plateau function (1 on [-delta, delta], 0 outside
[-2 delta, 2 delta]) and ``G_k`` is ``G`` mollified at scale ``1/k``.  The
second variation along ``f_k nu_H`` is LHS - RHS with

    LHS = int (1 + y^2 G'/2) (d_y f_k)^2 / sqrt(1 + G^2)
    RHS = 2 int G' f_k^2 / ((1 + y^2 G'/2) sqrt(1 + G^2)).

As k grows RHS tends to ``sqrt(2) pi int chi^2 sqrt(G'/(1+G^2))`` and the
ratio LHS/RHS to 1/4, so LHS < RHS for k large enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .bumps import bump, plateau, plateau_slope_max, smooth_step
from .jets import UFunc
from .quadrature import QuadratureSpec
from .surfaces import GraphicalStrip, NotApplicable

K_MAX = 2**20
SQRT2PI = math.sqrt(2) * math.pi


class Shifted(UFunc):
    """``t -> G(t0 + t)``."""

    def __init__(self, G, t0):
        self.G = G
        self.t0 = float(t0)

    def derivs(self, x, n):
        return self.G.derivs(np.asarray(x, float) + self.t0, n)

    def __repr__(self):
        return f"Shifted({self.G!r}, {self.t0!r})"


def kernel_normaliser(delta):
    """``c`` with ``int c bump(s / (2 delta)) ds = 1``."""
    res = quadrature.integrate_1d(lambda s: bump(s / (2 * delta)), -2 * delta, 2 * delta,
                                  QuadratureSpec(rtol=1e-14))
    return 1.0 / res.value


def kernel(s, delta):
    """Normalised mollifier supported in [-2 delta, 2 delta]."""
    return kernel_normaliser(delta) * bump(np.asarray(s, float) / (2 * delta))


class Mollified(UFunc):
    """``G_k = G * kernel_k`` with ``kernel_k(s) = k kernel(k s)``.

    The convolution uses a Kronrod partition of the kernel support found
    adaptively (tolerance 1e-12) for G' at sample points in
    ``[-2 delta, 2 delta]`` and then frozen, so every evaluation uses the
    same rule.
    """

    def __init__(self, G, delta, k, rtol=1e-12):
        self.G = G
        self.delta = float(delta)
        self.k = float(k)
        c = kernel_normaliser(delta)
        tsamp = np.linspace(-2 * delta, 2 * delta, 17)

        def integrand(sig):
            g1 = G.derivs(tsamp[:, None, None] - sig[None] / k, 1)[1]
            return g1 * (c * bump(sig / (2 * delta)))[None]

        res = quadrature.integrate_1d(integrand, -2 * delta, 2 * delta,
                                      QuadratureSpec(rtol=rtol, atol=1e-300), strict=False)
        nodes, weights = [], []
        for lo, hi in res.cells:
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            nodes.append(mid + half * quadrature.NODES)
            weights.append(half * quadrature.KRONROD)
        sig = np.concatenate(nodes)
        w = np.concatenate(weights) * c * bump(sig / (2 * delta))
        keep = w != 0
        self.shifts = sig[keep] / k
        self.weights = w[keep]
        self.quad_error = res.error

    def derivs(self, x, n):
        x = np.asarray(x, float)
        flat = x.reshape(-1)
        uniq, inv = np.unique(flat, return_inverse=True)
        out = []
        ders = [np.zeros(len(uniq)) for _ in range(n + 1)]
        step = max(1, 200000 // max(len(self.shifts), 1))
        for s in range(0, len(uniq), step):
            arg = uniq[s:s + step, None] - self.shifts[None, :]
            d = self.G.derivs(arg, n)
            for j in range(n + 1):
                ders[j][s:s + step] = d[j] @ self.weights
        for j in range(n + 1):
            out.append(ders[j][inv].reshape(x.shape))
        return out


def test_function(G, Gk, delta, k):
    """``f_k`` as a callable of (Y, T) values or jets."""

    def f(Y, T):
        chi_y = plateau(Y / k, delta)
        chi_t = plateau(T, delta)
        rho = 1.0 + 0.5 * Y * Y * Gk.derivative(1)(T)
        return chi_y * chi_t * rho ** -0.5

    return f


@dataclass
class Sides:
    k: float
    lhs: float
    rhs: float
    quad_error: float

    @property
    def ratio(self):
        return self.lhs / self.rhs

    @property
    def gap(self):
        return self.lhs - self.rhs


def reverse_inequality_sides(G, delta, k, spec=None, Gk=None):
    """LHS and RHS for the recentred profile ``G`` (centre t = 0)."""
    spec = spec or QuadratureSpec(rtol=1e-9)
    Gk = Gk or Mollified(G, delta, k)
    c_slope = 1.0 / (delta * k)

    def integrand(y, t):
        g0, g1 = G.derivs(t, 1)[:2]
        gk1 = Gk.derivs(t, 1)[1]
        s_t = smooth_step.derivs((2 * delta - np.abs(t)) / delta, 0)[0]
        sy = smooth_step.derivs((2 * delta - np.abs(y) / k) / delta, 1)
        chi_y, dchi_y = sy[0], -np.sign(y) * sy[1] * c_slope
        rho = 1 + 0.5 * y * y * g1
        rhok = 1 + 0.5 * y * y * gk1
        root = np.sqrt(1 + g0 * g0)
        fy = s_t * (dchi_y / np.sqrt(rhok) - chi_y * 0.5 * y * gk1 / rhok**1.5)
        f2 = (chi_y * s_t) ** 2 / rhok
        lhs = rho * fy * fy / root
        rhs = 2 * g1 * f2 / (rho * root)
        return np.stack([lhs, rhs])

    res = quadrature.integrate_2d(integrand, (0.0, 2 * delta * k), (-2 * delta, 2 * delta), spec)
    lhs, rhs = 2 * res.value
    return Sides(float(k), float(lhs), float(rhs), 2 * res.error)


def asymptotic_rhs(G, delta, spec=None):
    """``sqrt(2) pi int chi^2 sqrt(G' / (1 + G^2)) dt``."""

    def f(t):
        g0, g1 = G.derivs(t, 1)[:2]
        return plateau(t, delta) ** 2 * np.sqrt(np.maximum(g1, 0) / (1 + g0 * g0))

    return SQRT2PI * quadrature.integrate_1d(f, -2 * delta, 2 * delta, spec).value


def dominates(G, Gk, delta, samples=1024):
    """``G'/2 <= G_k' <= 2 G'`` on [-2 delta, 2 delta]."""
    t = np.linspace(-2 * delta, 2 * delta, samples)
    g1 = G.derivs(t, 1)[1]
    gk1 = Gk.derivs(t, 1)[1]
    return bool(np.all(0.5 * g1 <= gk1) and np.all(gk1 <= 2 * g1))


@dataclass
class K0Search:
    k0: int
    sides: Sides
    history: list = field(default_factory=list)


def _accept(G, delta, k, spec, history):
    Gk = Mollified(G, delta, k)
    s = reverse_inequality_sides(G, delta, k, spec, Gk)
    ok = s.lhs < s.rhs and dominates(G, Gk, delta)
    history.append({"k": int(k), "lhs": s.lhs, "rhs": s.rhs, "accepted": ok})
    return ok, s


def find_k0(G, delta, spec=None, k_max=K_MAX):
    """Smallest k (doubling, then bisection) with LHS < RHS and the
    mollified derivative within a factor 2 of G'."""
    history = []
    k = 2
    last_fail = 1
    while True:
        ok, s = _accept(G, delta, k, spec, history)
        if ok:
            break
        last_fail = k
        k *= 2
        if k > k_max:
            raise NotApplicable(f"no k <= {k_max} gives LHS < RHS")
    good, good_sides = k, s
    lo = last_fail
    while good - lo > 1:
        mid = (lo + good) // 2
        ok, s = _accept(G, delta, mid, spec, history)
        if ok:
            good, good_sides = mid, s
        else:
            lo = mid
    return K0Search(int(good), good_sides, history)


def ratio_trend(G, delta, ks, spec=None):
    return [reverse_inequality_sides(G, delta, k, spec) for k in ks]


def _as_x_form(S):
    if not isinstance(S, GraphicalStrip):
        raise TypeError("certify_instability needs a GraphicalStrip")
    return S


def default_window(S, length=2.0, samples=4001):
    """Sub-window of the strict window used when none is given.

    Long or unbounded strict windows make delta large and push the support
    into regions where G' is tiny, so we keep at most ``length`` of it,
    centred where the limiting density sqrt(G'/(1+G^2)) is largest.
    """
    J = S.strict_window
    if J is None:
        raise NotApplicable("strip has no strict window (G' > 0 nowhere)")
    a, b = max(float(J[0]), S.window[0]), min(float(J[1]), S.window[1])
    if b - a <= length:
        return a, b
    t = np.linspace(a + length / 2, b - length / 2, samples)
    g0, g1 = S.G.derivs(t, 1)[:2]
    dens = g1 / (1 + g0 * g0)
    best = np.flatnonzero(dens >= dens.max() * (1 - 1e-9))
    c = t[best[np.argmin(np.abs(t[best] - 0.5 * (a + b)))]]
    return c - length / 2, c + length / 2


def certify_instability(S, window=None, spec=None, fd_check=True, k_max=K_MAX):
    """Negative-gap certificate for a strict strip.

    The window ``J = (a, b)`` (``default_window`` unless given) is recentred
    at ``t0 = (a + b)/2`` with ``delta = (b - a)/8``.
    """
    S = _as_x_form(S)
    if window is not None:
        a, b = (float(v) for v in window)
    else:
        a, b = default_window(S)
    t0 = 0.5 * (a + b)
    delta = (b - a) / 8
    G = Shifted(S.G, t0)
    t = np.linspace(-4 * delta, 4 * delta, 2049)[1:-1]
    if np.any(G.derivs(t, 1)[1] <= 0):
        raise NotApplicable("G' is not positive on the window")
    search = find_k0(G, delta, spec, k_max)
    k0 = search.k0
    sides = search.sides
    Gk = Mollified(G, delta, k0)
    f = test_function(G, Gk, delta, k0)
    from .variation import strip_second_variation

    shifted = GraphicalStrip(G, (a - t0, b - t0), "X", (a - t0, b - t0))
    supp = ((-2 * delta * k0, 2 * delta * k0), (-2 * delta, 2 * delta))
    v2 = strip_second_variation(shifted, f, supp, "normal", spec or QuadratureSpec(rtol=1e-9))
    cert = {
        "G": S.describe()["G"],
        "I": [float(v) for v in S.interval],
        "J": [a, b],
        "t0": t0,
        "delta": delta,
        "k0": k0,
        "lhs": sides.lhs,
        "rhs": sides.rhs,
        "gap": sides.gap,
        "v2": float(v2.value),
        "quad_err": float(sides.quad_error + v2.error),
        "chi_slope_max": plateau_slope_max(delta),
        "rhs_asymptote": asymptotic_rhs(G, delta),
        "history": search.history,
    }
    if fd_check:
        from .variation import normal_field, second_variation_numeric
        from .surfaces import strip_patch

        patch = strip_patch(shifted, supp[0], supp[1])
        X = normal_field(f, supp, ambient=False)
        fd = second_variation_numeric(patch, X, spec=spec)
        cert["v2_fd"] = fd.value
        cert["v2_fd_uncertainty"] = fd.uncertainty
    return cert
