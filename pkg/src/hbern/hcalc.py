"""Horizontal calculus on surfaces in H^1.

Frame data come from two independent routes:

* a defining function phi: ``p = X1 phi``, ``q = X2 phi``, ``omega = T phi``;
* a parametric patch: the frame components of ``theta_u x theta_v``.

From these we get the horizontal normal ``nu = (pbar, qbar)``, the
tangent horizontal direction ``e1 = (qbar, -pbar)``, the operators
``Y = pbar X1 + qbar X2`` and ``Z = qbar X1 - pbar X2`` and the mean
curvature ``H = X1 pbar + X2 qbar``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .hgroup import GroupPoint
from .jets import Jet
from .surfaces import NotApplicable

EPS_CHAR = 1e-9


class CharacteristicPoint(NotApplicable):
    """The point is (numerically) characteristic: W is too small."""


@dataclass
class FrameData:
    p: np.ndarray
    q: np.ndarray
    omega: np.ndarray
    W: np.ndarray
    N: np.ndarray
    pbar: np.ndarray
    qbar: np.ndarray
    wbar: np.ndarray

    @property
    def nu(self):
        return np.stack([self.pbar, self.qbar])

    @property
    def e1(self):
        return np.stack([self.qbar, -self.pbar])

    @property
    def characteristic(self):
        return self.W <= EPS_CHAR * (1 + self.N)


def _frame(p, q, w):
    p, q, w = (np.asarray(a, float) for a in (p, q, w))
    W = np.hypot(p, q)
    N = np.sqrt(W * W + w * w)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pb = np.where(W > 0, p / np.where(W > 0, W, 1), np.nan)
        qb = np.where(W > 0, q / np.where(W > 0, W, 1), np.nan)
        wb = np.where(W > 0, w / np.where(W > 0, W, 1), np.nan)
    return FrameData(p, q, w, W, N, pb, qb, wb)


def _coords(g):
    if isinstance(g, GroupPoint):
        return g.x, g.y, g.t
    return g


# defining-function route

def frame_jets(defining, g, order=1):
    """Jets (in x, y, t) of p, q, omega of order ``order``."""
    x, y, t = _coords(g)
    phi, (X, Y, T) = defining.evaluate(x, y, t, order + 1)
    px, py, pt = phi.diff(0), phi.diff(1), phi.diff(2)
    Yl, Xl = Y.truncate(order), X.truncate(order)
    p = px - 0.5 * Yl * pt
    q = py + 0.5 * Xl * pt
    return p, q, pt, (Xl, Yl, T.truncate(order))


def frame_from_defining(defining, g):
    p, q, w, _ = frame_jets(defining, g, 0)
    return _frame(p.value, q.value, w.value)


def unit_normal_jets(defining, g, order=1):
    """Jets of pbar, qbar, wbar (raises on characteristic points)."""
    p, q, w, coords = frame_jets(defining, g, order)
    W2 = p * p + q * q
    W = np.sqrt(W2.value)
    if np.any(W <= EPS_CHAR * (1 + np.sqrt(W * W + w.value**2))):
        raise CharacteristicPoint("characteristic point: horizontal normal undefined")
    invW = W2 ** -0.5
    return p * invW, q * invW, w * invW, coords


def frame_derivatives(jet, coords):
    """Values of ``X1 f, X2 f, T f`` from an ambient jet of order >= 1."""
    X, Y, _ = coords
    fx, fy, ft = jet.deriv(0), jet.deriv(1), jet.deriv(2)
    x, y = X.value, Y.value
    return fx - 0.5 * y * ft, fy + 0.5 * x * ft, ft


def yzt(jet, pbar, qbar, coords):
    """``(Y f, Z f, T f)`` for an ambient jet ``f``."""
    X1, X2, Tf = frame_derivatives(jet, coords)
    return pbar * X1 + qbar * X2, qbar * X1 - pbar * X2, Tf


def zyt_derivatives(defining, g, zeta):
    """``(Z zeta, Y zeta, T zeta)`` at g for an ambient function ``zeta``."""
    pb, qb, _, coords = unit_normal_jets(defining, g, 1)
    X, Y, T = coords
    z = zeta(X, Y, T)
    if not isinstance(z, Jet):
        z = X.like(np.broadcast_to(np.asarray(z, float), X.shape))
    Yz, Zz, Tz = yzt(z, pb.value, qb.value, coords)
    return Zz, Yz, Tz


def hmean_defining(defining, g):
    """``H = X1 pbar + X2 qbar`` at points g (vectorised)."""
    pb, qb, _, coords = unit_normal_jets(defining, g, 1)
    X1p, _, _ = frame_derivatives(pb, coords)
    _, X2q, _ = frame_derivatives(qb, coords)
    return X1p + X2q


def hmean_tangential(defining, g):
    """``H = qbar Z pbar - pbar Z qbar``; only tangential derivatives."""
    pb, qb, _, coords = unit_normal_jets(defining, g, 1)
    P, Q = pb.value, qb.value
    _, Zp, _ = yzt(pb, P, Q, coords)
    _, Zq, _ = yzt(qb, P, Q, coords)
    return Q * Zp - P * Zq


def second_variation_coefficient(defining, g):
    """``2(pbar T qbar - qbar T pbar) + 2 wbar (qbar Y pbar - pbar Y qbar) + wbar^2``."""
    pb, qb, wb, coords = unit_normal_jets(defining, g, 1)
    P, Q, Wb = pb.value, qb.value, wb.value
    Yp, _, Tp = yzt(pb, P, Q, coords)
    Yq, _, Tq = yzt(qb, P, Q, coords)
    return 2 * (P * Tq - Q * Tp) + 2 * Wb * (Q * Yp - P * Yq) + Wb * Wb


# patch route

def patch_frame_jets(x, y, t):
    """Jets of (p, q, omega), one order lower than the patch jets."""
    xu, xv = x.diff(0), x.diff(1)
    yu, yv = y.diff(0), y.diff(1)
    tu, tv = t.diff(0), t.diff(1)
    n = xu.order
    X, Y = x.truncate(n), y.truncate(n)
    w = xu * yv - xv * yu
    p = yu * tv - yv * tu - 0.5 * Y * w
    q = xv * tu - xu * tv + 0.5 * X * w
    return p, q, w


def frame_from_patch(patch, u, v):
    x, y, t = patch.evaluate(u, v, 1)
    p, q, w = patch_frame_jets(x, y, t)
    return _frame(p.value, q.value, w.value)


def _tangent_coefficients(x, y, t, pb, qb):
    """Solve ``theta_u a + theta_v b = e1`` (Euclidean least squares)."""
    xu, xv = x.deriv(0), x.deriv(1)
    yu, yv = y.deriv(0), y.deriv(1)
    tu, tv = t.deriv(0), t.deriv(1)
    X, Y = x.value, y.value
    e = (qb, -pb, -0.5 * qb * Y - 0.5 * pb * X)
    guu = xu * xu + yu * yu + tu * tu
    guv = xu * xv + yu * yv + tu * tv
    gvv = xv * xv + yv * yv + tv * tv
    bu = xu * e[0] + yu * e[1] + tu * e[2]
    bv = xv * e[0] + yv * e[1] + tv * e[2]
    det = guu * gvv - guv * guv
    return (gvv * bu - guv * bv) / det, (guu * bv - guv * bu) / det


def hmean_patch(patch, u, v):
    """``H = qbar Z pbar - pbar Z qbar`` with Z realised on the patch."""
    x, y, t = patch.evaluate(u, v, 2)
    p, q, w = patch_frame_jets(x, y, t)
    W2 = p * p + q * q
    W = np.sqrt(W2.value)
    if np.any(W <= EPS_CHAR * (1 + np.sqrt(W2.value + w.value**2))):
        raise CharacteristicPoint("characteristic point on the patch")
    invW = W2 ** -0.5
    pb, qb = p * invW, q * invW
    P, Q = pb.value, qb.value
    a, b = _tangent_coefficients(x, y, t, P, Q)
    Zp = a * pb.deriv(0) + b * pb.deriv(1)
    Zq = a * qb.deriv(0) + b * qb.deriv(1)
    return Q * Zp - P * Zq


def patch_unit_normal(patch, u, v, order=1):
    """Jets (in u, v) of pbar, qbar, wbar and W."""
    x, y, t = patch.evaluate(u, v, order + 1)
    p, q, w = patch_frame_jets(x, y, t)
    W2 = p * p + q * q
    if np.any(W2.value <= 0):
        raise CharacteristicPoint("characteristic point on the patch")
    invW = W2 ** -0.5
    return p * invW, q * invW, w * invW, W2 ** 0.5


def hmean(surface, point=None, u=None, v=None):
    """Mean curvature through the defining function when available,
    otherwise through the patch (then ``u, v`` are required)."""
    if getattr(surface, "defining", None) is not None and point is not None:
        return hmean_defining(surface.defining, point)
    if u is None or v is None:
        raise ValueError("patch route needs parameters (u, v)")
    return hmean_patch(surface.patch, u, v)


# intrinsic route

def burgers_residual(intrinsic, u, v):
    """``B(B(phi))`` with ``B f = f_u + phi f_v``; zero for H-minimal graphs."""
    phi = intrinsic.evaluate(u, v, 2)
    Bphi = phi.diff(0) + phi.truncate(1) * phi.diff(1)
    return Bphi.deriv(0) + phi.value * Bphi.deriv(1)


def hmean_intrinsic(intrinsic, u, v):
    """``-B(B(phi)) / (1 + B(phi)^2)^(3/2)``."""
    phi = intrinsic.evaluate(u, v, 2)
    Bphi = phi.diff(0) + phi.truncate(1) * phi.diff(1)
    BB = Bphi.deriv(0) + phi.value * Bphi.deriv(1)
    return -BB / (1 + Bphi.value**2) ** 1.5


def intrinsic_gradient(intrinsic, u, v):
    """``B(phi)`` at (u, v)."""
    phi = intrinsic.evaluate(u, v, 1)
    return phi.deriv(0) + phi.value * phi.deriv(1)


# characteristic set and integrals

@dataclass
class CharPoint:
    u: float
    v: float
    point: tuple
    W: float


def characteristic_scan(patch, grid=129, eps_char=EPS_CHAR, domain=None, candidate_ratio=0.05):
    """Zeros of W on a patch window.

    Grid local minima of W below ``candidate_ratio * median(W)`` are
    polished with a least-squares solve of ``p = q = 0``; polished points
    with ``W <= eps_char (1 + |N|)`` are returned.  An empty list means no
    characteristic points were found on the sampled window.
    """
    from scipy.optimize import least_squares

    (u0, u1), (v0, v1) = domain or patch.domain
    us = np.linspace(u0, u1, grid)
    vs = np.linspace(v0, v1, grid)
    U, V = np.meshgrid(us, vs, indexing="ij")
    fr = frame_from_patch(patch, U, V)
    W = fr.W
    pad = np.pad(W, 1, constant_values=np.inf)
    is_min = np.ones_like(W, bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            nb = pad[1 + di: 1 + di + W.shape[0], 1 + dj: 1 + dj + W.shape[1]]
            is_min &= W <= nb
    thresh = candidate_ratio * max(np.median(W), 1e-300)
    cand = np.argwhere(is_min & (W < thresh))
    found = []
    for i, j in cand:
        def resid(z):
            f = frame_from_patch(patch, np.array(z[0]), np.array(z[1]))
            return [float(f.p), float(f.q)]

        try:
            sol = least_squares(resid, [U[i, j], V[i, j]], bounds=([u0, v0], [u1, v1]),
                                xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except ValueError:
            continue
        f = frame_from_patch(patch, np.array(sol.x[0]), np.array(sol.x[1]))
        if float(f.W) <= eps_char * (1 + float(f.N)):
            pt = tuple(float(c) for c in patch.point(sol.x[0], sol.x[1]))
            if all(abs(pt[0] - c.point[0]) + abs(pt[1] - c.point[1]) + abs(pt[2] - c.point[2])
                   > 1e-7 for c in found):
                found.append(CharPoint(float(sol.x[0]), float(sol.x[1]), pt, float(f.W)))
    return found


def sigma_h_integral(patch, F=None, spec=None, domain=None, strict=True):
    """``integral of F dsigma_H = integral of F W du dv`` over the patch window.

    ``F`` is called as ``F(u, v)`` on arrays and may return a stack of
    components along a new leading axis.
    """
    (u0, u1), (v0, v1) = domain or patch.domain

    def integrand(U, V):
        fr = frame_from_patch(patch, U, V)
        if F is None:
            return fr.W
        return np.asarray(F(U, V)) * fr.W

    return quadrature.integrate_2d(integrand, (u0, u1), (v0, v1), spec, strict=strict)


def hmean_samples(surface, u, v):
    """Mean curvature at patch parameters, via the defining route if present."""
    if surface.defining is not None:
        x, y, t = surface.patch.point(u, v)
        return hmean_defining(surface.defining, (x, y, t))
    return hmean_patch(surface.patch, u, v)
