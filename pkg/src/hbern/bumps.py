"""Smooth compactly supported functions built from exp(-1/x).

All functions accept plain arrays or jets.
"""

from __future__ import annotations

import math

import numpy as np

from .jets import Jet, UFunc, apply


def _flat_derivs(x, n):
    """Derivatives of psi(x) = exp(-1/x) for x > 0, zero elsewhere.

    psi^(k) = psi * P_k(1/x) with P_{k+1}(w) = w^2 (P_k(w) - P_k'(w)).
    """
    x = np.asarray(x, float)
    pos = x > 0
    safe = np.where(pos, x, 1.0)
    w = 1.0 / safe
    psi = np.where(pos, np.exp(-w), 0.0)
    out = [psi]
    poly = np.polynomial.Polynomial([1.0])
    w2 = np.polynomial.Polynomial([0.0, 0.0, 1.0])
    for _ in range(n):
        poly = w2 * (poly - poly.deriv())
        out.append(np.where(pos, psi * poly(w), 0.0))
    return out


class _Flat(UFunc):
    def derivs(self, x, n):
        return _flat_derivs(x, n)


flat = _Flat()


class _Step(UFunc):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""

    def derivs(self, x, n):
        x = np.asarray(x, float)
        (e,) = Jet.variables([x], n)
        a = e.compose(_flat_derivs(x, n))
        b = (1.0 - e).compose(_flat_derivs(1.0 - x, n))
        s = a / (a + b)
        out = [s.c[k] * math.factorial(k) for k in range(n + 1)]
        # exact values on the flat parts, where the quotient rounds
        out[0] = np.where(x >= 1, 1.0, np.where(x <= 0, 0.0, out[0]))
        for k in range(1, n + 1):
            out[k] = np.where((x >= 1) | (x <= 0), 0.0, out[k])
        return out


smooth_step = _Step()


def plateau(s, delta):
    """Equal to 1 on |s| <= delta and 0 on |s| >= 2 delta."""
    if isinstance(s, Jet):
        sign = np.where(s.value >= 0, 1.0, -1.0)
        return smooth_step((2 * delta - s * sign) / delta)
    return smooth_step((2 * delta - np.abs(np.asarray(s, float))) / delta)


def plateau_slope_max(delta, samples=20001):
    """Numerical sup of |d/ds plateau(s, delta)|."""
    s = np.linspace(delta, 2 * delta, samples)
    d = smooth_step.derivs((2 * delta - s) / delta, 1)[1] / delta
    return float(np.max(np.abs(d)))


def bump(s):
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; equals 1 at 0."""
    arg = 1.0 - s * s
    if isinstance(arg, Jet):
        return apply(arg, _flat_derivs) * math.e
    return _flat_derivs(arg, 0)[0] * math.e


def box_bump(u, v, center, radius):
    """Product bump supported in the box ``|u-u0| < ru``, ``|v-v0| < rv``."""
    (u0, v0), (ru, rv) = center, radius
    su, sv = (u - u0) / ru, (v - v0) / rv
    if isinstance(su, Jet) and isinstance(sv, Jet) and su.shape == sv.shape:
        # jets are only worth building inside the support
        inside = (np.abs(su.value) < 1) & (np.abs(sv.value) < 1)
        c = np.zeros(su.c.shape)
        if np.any(inside):
            part = bump(Jet(su.c[:, inside], su.nvars, su.order)) * \
                bump(Jet(sv.c[:, inside], sv.nvars, sv.order))
            c[:, inside] = part.c
        return Jet(c, su.nvars, su.order)
    return bump(su) * bump(sv)


def ball_bump(coords, center, radius):
    """Product bump in several variables (support in a cube)."""
    out = 1.0
    for c, c0 in zip(coords, center):
        out = bump((c - c0) / radius) * out
    return out
