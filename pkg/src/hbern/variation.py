"""First and second variation of the horizontal perimeter.

A deformation is a compactly supported vector field ``a X1 + b X2 + k T``
along a patch.  The deformed surface is ``theta + lam * X(theta)``.
Closed-form variation integrals are compared against finite differences of
the perimeter of deformed patches.  All finite differences reuse one
quadrature partition for every stencil point, so the quadrature noise is
a smooth function of ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .bumps import box_bump
from .hcalc import (
    frame_from_patch,
    hmean_defining,
    hmean_patch,
    patch_frame_jets,
    patch_unit_normal,
    unit_normal_jets,
    yzt,
    _tangent_coefficients,
)
from .jets import Jet
from .surfaces import ParamPatch, _lift


@dataclass(frozen=True)
class Deformation:
    """Field ``(a, b, k)`` along a patch with support in a parameter box.

    ``fields(patch, U, V)`` returns frame components as jets in (u, v) of
    the same order as the seeds ``U, V``.
    """

    fields: Callable
    support: tuple
    name: str = "deformation"

    @property
    def diameter(self):
        (u0, u1), (v0, v1) = self.support
        return float(np.hypot(u1 - u0, v1 - v0))


def _zero_like(U):
    return U.like(np.zeros(U.shape))


def param_field(a=None, b=None, k=None, support=None, name="param"):
    """Field from callables of the parameter jets ``(U, V)``."""

    def fields(patch, U, V):
        return tuple(_lift(f(U, V), U) if f is not None else _zero_like(U) for f in (a, b, k))

    return Deformation(fields, support, name)


def ambient_field(a=None, b=None, k=None, support=None, name="ambient"):
    """Field from ambient callables of ``(x, y, t)`` composed with the patch."""

    def fields(patch, U, V):
        X, Y, T = patch.fn(U, V)
        X, Y, T = _lift(X, U), _lift(Y, U), _lift(T, U)
        return tuple(_lift(f(X, Y, T), U) if f is not None else _zero_like(U) for f in (a, b, k))

    return Deformation(fields, support, name)


def normal_field(h, support, ambient=True, name="normal"):
    """``h nu_H``: the field ``(h pbar, h qbar, 0)``.

    ``h`` is an ambient function of (x, y, t), or of the parameters when
    ``ambient`` is false.
    """

    def fields(patch, U, V):
        pb, qb, _, _ = patch_unit_normal(patch, U.value, V.value, U.order)
        if ambient:
            X, Y, T = patch.fn(U, V)
            hv = _lift(h(_lift(X, U), _lift(Y, U), _lift(T, U)), U)
        else:
            hv = _lift(h(U, V), U)
        return hv * pb, hv * qb, _zero_like(U)

    return Deformation(fields, support, name)


def deform(patch, X, lam):
    """The patch ``theta + lam * X``."""
    lam = float(lam)

    def fn(U, V):
        x, y, t = (_lift(c, U) for c in patch.fn(U, V))
        a, b, k = X.fields(patch, U, V)
        return (x + lam * a, y + lam * b, t + lam * (k - 0.5 * a * y + 0.5 * b * x))

    return ParamPatch(fn, patch.domain, f"{patch.name}+{lam:g}X")


def _integrate(integrand, support, spec, rule, strict=True):
    """Integrate over a support box.  ``rule='trapezoid'`` suits integrands
    that vanish to all orders on the box edges (bump-supported fields)."""
    (u0, u1), (v0, v1) = support
    if rule == "adaptive":
        return quadrature.integrate_2d(integrand, (u0, u1), (v0, v1), spec, strict=strict)
    if rule == "trapezoid":
        return quadrature.compact_trapezoid_2d(integrand, (u0, u1), (v0, v1), spec)
    raise ValueError("rule must be 'adaptive' or 'trapezoid'")


def _perimeter_differences(patch, X, lams, spec, rule="adaptive"):
    """``int_supp (W_lam - W_0) du dv`` for each lam, on one shared partition."""
    lams = np.asarray(lams, float)

    def integrand(u, v):
        U, V = Jet.variables([u, v], 1)
        x, y, t = (_lift(c, U) for c in patch.fn(U, V))
        a, b, k = X.fields(patch, U, V)
        kk = k - 0.5 * a * y + 0.5 * b * x
        p0, q0, _ = patch_frame_jets(x, y, t)
        W0 = np.hypot(p0.value, q0.value)
        out = []
        for lam in lams:
            p, q, _ = patch_frame_jets(x + lam * a, y + lam * b, t + lam * kk)
            out.append(np.hypot(p.value, q.value) - W0)
        return np.stack(out)

    return _integrate(integrand, X.support, spec, rule, strict=False)


def perimeter_profile(patch, X, lams, spec=None):
    """Horizontal perimeter of the deformed patch window for each ``lam``."""
    base = quadrature.integrate_2d(
        lambda u, v: frame_from_patch(patch, u, v).W, *patch.domain, spec
    ).value
    diff = _perimeter_differences(patch, X, lams, spec)
    return base + np.asarray(diff.value)


@dataclass
class FDResult:
    value: float
    uncertainty: float
    step: float
    coarse: float
    fine: float
    quad_error: float


def field_gradient_max(patch, X, grid=65):
    """Largest parameter gradient of the field components on its support."""
    (u0, u1), (v0, v1) = X.support
    U, V = np.meshgrid(np.linspace(u0, u1, grid), np.linspace(v0, v1, grid), indexing="ij")
    U, V = Jet.variables([U, V], 1)
    return max(float(np.max(np.hypot(f.deriv(0), f.deriv(1)))) for f in X.fields(patch, U, V))


def _default_step(patch, X, h):
    """``1e-2 * diameter``, shortened for steep fields so that the largest
    stencil offset keeps ``lam * |grad X|`` near 0.1; otherwise the deformed
    surface can come close to characteristic points inside the stencil."""
    if h is not None:
        return float(h)
    g = field_gradient_max(patch, X)
    return min(1e-2 * X.diameter, 0.05 / g) if g > 0 else 1e-2 * X.diameter


def second_variation_numeric(patch, X, h=None, spec=None, rule="adaptive"):
    """5-point second difference of the perimeter with Richardson extrapolation
    over steps ``h`` and ``h/2``."""
    h = _default_step(patch, X, h)
    lams = np.array([h / 2, -h / 2, h, -h, 2 * h, -2 * h])
    res = _perimeter_differences(patch, X, lams, spec, rule)
    d = dict(zip(lams, np.asarray(res.value)))

    def d2(s):
        return (-d[2 * s] + 16 * d[s] + 16 * d[-s] - d[-2 * s]) / (12 * s * s)

    coarse, fine = d2(h), d2(h / 2)
    value = fine + (fine - coarse) / 15
    unc = abs(fine - coarse) / 15 + 64 * res.error / (12 * (h / 2) ** 2) * 1e-3
    return FDResult(float(value), float(unc), h, float(coarse), float(fine), res.error)


def first_variation_numeric(patch, X, h=None, spec=None, rule="adaptive"):
    h = _default_step(patch, X, h)
    lams = np.array([h / 2, -h / 2, h, -h, 2 * h, -2 * h])
    res = _perimeter_differences(patch, X, lams, spec, rule)
    d = dict(zip(lams, np.asarray(res.value)))

    def d1(s):
        return (d[-2 * s] - 8 * d[-s] + 8 * d[s] - d[2 * s]) / (12 * s)

    coarse, fine = d1(h), d1(h / 2)
    value = fine + (fine - coarse) / 15
    return FDResult(float(value), float(abs(fine - coarse) / 15), h, float(coarse),
                    float(fine), res.error)


def first_variation_formula(patch, X, spec=None, defining=None):
    """``int H (a p + b q + k omega) du dv`` over the support."""

    def integrand(u, v):
        U, V = Jet.variables([u, v], 1)
        x, y, t = (_lift(c, U) for c in patch.fn(U, V))
        p, q, w = patch_frame_jets(x, y, t)
        a, b, k = X.fields(patch, U, V)
        if defining is not None:
            H = hmean_defining(defining, (x.value, y.value, t.value))
        else:
            H = hmean_patch(patch, u, v)
        return H * (a.value * p.value + b.value * q.value + k.value * w.value)

    (u0, u1), (v0, v1) = X.support
    return quadrature.integrate_2d(integrand, (u0, u1), (v0, v1), spec)


def _points(patch, u, v, order=1):
    U, V = Jet.variables([u, v], order)
    x, y, t = (_lift(c, U) for c in patch.fn(U, V))
    return U, V, x, y, t


def second_variation_normal_formula(surface, h, support, spec=None, ambient=True):
    """``int (Z h)^2 + h^2 [2(pbar T qbar - qbar T pbar)
    + 2 wbar (qbar Y pbar - pbar Y qbar) + wbar^2] dsigma_H``.

    Frame quantities come from the defining function; ``h`` is ambient
    (``h(x, y, t)``) or parametric (``h(u, v)``, then Z is realised on the
    patch).
    """
    patch, defining = surface.patch, surface.defining

    def integrand(u, v):
        U, V, x, y, t = _points(patch, u, v, 1)
        g = (x.value, y.value, t.value)
        pb, qb, wb, coords = unit_normal_jets(defining, g, 1)
        P, Q, Wb = pb.value, qb.value, wb.value
        Yp, _, Tp = yzt(pb, P, Q, coords)
        Yq, _, Tq = yzt(qb, P, Q, coords)
        coeff = 2 * (P * Tq - Q * Tp) + 2 * Wb * (Q * Yp - P * Yq) + Wb * Wb
        if ambient:
            hj = _lift(h(*coords), coords[0])
            _, Zh, _ = yzt(hj, P, Q, coords)
            hv = hj.value
        else:
            hj = _lift(h(U, V), U)
            al, be = _tangent_coefficients(x, y, t, P, Q)
            Zh = al * hj.deriv(0) + be * hj.deriv(1)
            hv = hj.value
        p, q, _ = patch_frame_jets(x, y, t)
        W = np.hypot(p.value, q.value)
        return (Zh * Zh + hv * hv * coeff) * W

    (u0, u1), (v0, v1) = support
    return quadrature.integrate_2d(integrand, (u0, u1), (v0, v1), spec)


def second_variation_x1_formula(surface, a, support, spec=None):
    """Second variation along ``a X1`` for an ambient function ``a``:
    ``int pbar^2 (Z a)^2 + pbar^2 wbar^2 a^2 + wbar Z(a^2)
    - pbar qbar (T(a^2) - wbar Y(a^2)) dsigma_H``."""
    patch, defining = surface.patch, surface.defining

    def integrand(u, v):
        U, V, x, y, t = _points(patch, u, v, 1)
        g = (x.value, y.value, t.value)
        pb, qb, wb, coords = unit_normal_jets(defining, g, 1)
        P, Q, Wb = pb.value, qb.value, wb.value
        aj = _lift(a(*coords), coords[0])
        av = aj.value
        Ya, Za, Ta = yzt(aj, P, Q, coords)
        val = (P * P * Za * Za + P * P * Wb * Wb * av * av + Wb * 2 * av * Za
               - P * Q * (2 * av * Ta - Wb * 2 * av * Ya))
        p, q, _ = patch_frame_jets(x, y, t)
        return val * np.hypot(p.value, q.value)

    (u0, u1), (v0, v1) = support
    return quadrature.integrate_2d(integrand, (u0, u1), (v0, v1), spec)


def strip_second_variation(S, u, support, mode="normal", spec=None):
    """Second variation on an X-form strip in (y, t) coordinates.

    ``u(Y, T)`` is a parametric field (jets in (y, t)).  ``mode='normal'``
    is the deformation ``u nu_H``; ``mode='x1'`` the deformation ``u X1``:

        normal:  int (1 + y^2 G'/2) u_y^2 / sqrt(1+G^2)
                 - 2 u^2 G' / ((1 + y^2 G'/2) sqrt(1+G^2))
        x1:      the same with (1+G^2)^(3/2) in both denominators.
    """
    if mode not in ("normal", "x1"):
        raise ValueError("mode must be 'normal' or 'x1'")
    power = 0.5 if mode == "normal" else 1.5
    G = S.G

    def integrand(y, t):
        Y, T = Jet.variables([y, t], 1)
        uj = _lift(u(Y, T), Y)
        g0, g1 = G.derivs(t, 1)[:2]
        rho = 1 + 0.5 * y * y * g1
        den = (1 + g0 * g0) ** power
        uy = uj.deriv(0)
        return rho * uy * uy / den - 2 * uj.value**2 * g1 / (rho * den)

    (y0, y1), (t0, t1) = support
    return quadrature.integrate_2d(integrand, (y0, y1), (t0, t1), spec)


def z_squared_integral(patch, a_param, support, spec=None, rule="adaptive"):
    """``int (Z a)^2 dsigma_H`` for a parametric function ``a(U, V)``."""

    def integrand(u, v):
        U, V, x, y, t = _points(patch, u, v, 1)
        p, q, _ = patch_frame_jets(x, y, t)
        W = np.hypot(p.value, q.value)
        P, Q = p.value / W, q.value / W
        al, be = _tangent_coefficients(x, y, t, P, Q)
        aj = _lift(a_param(U, V), U)
        Za = al * aj.deriv(0) + be * aj.deriv(1)
        return Za * Za * W

    return _integrate(integrand, support, spec, rule)


def random_bump_field(rng, support, nbumps=3, scale=1.0):
    """Random smooth function of (U, V) compactly supported in ``support``."""
    (u0, u1), (v0, v1) = support
    du, dv = u1 - u0, v1 - v0
    terms = []
    for _ in range(nbumps):
        ru = rng.uniform(0.15, 0.45) * du
        rv = rng.uniform(0.15, 0.45) * dv
        cu = rng.uniform(u0 + ru, u1 - ru)
        cv = rng.uniform(v0 + rv, v1 - rv)
        c = rng.normal() * scale
        terms.append((c, (cu, cv), (ru, rv)))

    def f(U, V):
        out = 0.0
        for c, cen, rad in terms:
            out = box_bump(U, V, cen, rad) * c + out
        return out

    return f


def random_deformation(rng, support, nbumps=3, scale=1.0, components="abk"):
    """Random compactly supported parametric field."""
    fs = {c: random_bump_field(rng, support, nbumps, scale) for c in components}
    return param_field(fs.get("a"), fs.get("b"), fs.get("k"), support, "random")


@dataclass
class StabilitySample:
    v2: FDResult
    z_squared: float
    z_error: float

    @property
    def rel_diff(self):
        return abs(self.v2.value - self.z_squared) / max(abs(self.z_squared), 1e-300)


def vertical_plane_stability(plane, rng, samples=5, support=((-1.0, 1.0), (-1.0, 1.0)),
                             nbumps=3, spec=None):
    """Second variation of a vertical plane along random fields, with the
    squared derivative of the normal component alongside.

    On a vertical plane the second variation along ``a X1 + b X2 + k T``
    reduces to ``int (Z n)^2 dsigma_H`` with ``n`` the component along the
    unit normal.  Returns one :class:`StabilitySample` per random field.
    """
    spec = spec or quadrature.QuadratureSpec(rtol=1e-5, atol=1e-12)
    patch = plane.patch
    u0 = np.array([0.5 * (lo + hi) for lo, hi in support])
    pb, qb, _, _ = patch_unit_normal(patch, u0[:1], u0[1:], 1)
    nx, ny = float(pb.value[0]), float(qb.value[0])
    out = []
    for _ in range(samples):
        fa = random_bump_field(rng, support, nbumps)
        fb = random_bump_field(rng, support, nbumps)
        fk = random_bump_field(rng, support, nbumps)
        X = param_field(fa, fb, fk, support, "random")
        v2 = second_variation_numeric(patch, X, spec=spec, rule="trapezoid")

        def normal_part(U, V):
            return fa(U, V) * nx + fb(U, V) * ny

        z = z_squared_integral(patch, normal_part, support, spec, rule="trapezoid")
        out.append(StabilitySample(v2, float(z.value), float(z.error)))
    return out
