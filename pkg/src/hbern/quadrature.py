"""Adaptive Gauss-Kronrod quadrature on intervals and rectangles.

Each cell is integrated with the 15-point Kronrod rule; the embedded
7-point Gauss rule gives the error estimate.  On rectangles the tensor
rule is used and the per-axis estimates (Gauss in one direction, Kronrod in
the other) decide which axis to bisect.  Integrands are vectorised: they
receive arrays of nodes for a whole batch of cells and may return either an
array of the same shape or one with an extra leading component axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG7 = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-node rule on [-1, 1]
NODES = np.concatenate([-XGK[:-1], XGK[::-1]])
KRONROD = np.concatenate([WGK[:-1], WGK[::-1]])
GAUSS = np.zeros(15)
_g_idx_neg = [1, 3, 5]
for _i, _w in zip(_g_idx_neg, WG7[:3]):
    GAUSS[_i] = _w
    GAUSS[14 - _i] = _w
GAUSS[7] = WG7[3]


@dataclass(frozen=True)
class QuadratureSpec:
    rtol: float = 1e-10
    atol: float = 1e-14
    max_depth: int = 30
    max_cells: int = 400_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol >= 0 and self.max_depth > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class QuadResult:
    value: object
    error: float
    ncells: int
    nevals: int
    converged: bool = True
    cells: list = field(default_factory=list, repr=False)

    def __float__(self):
        return float(self.value)


class QuadratureError(RuntimeError):
    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


def _with_components(vals, shape):
    vals = np.asarray(vals, dtype=float)
    if vals.shape == shape:
        return vals[None], False
    if vals.shape[1:] == shape:
        return vals, True
    return np.broadcast_to(vals, shape)[None].copy(), False


def integrate_1d(f, a, b, spec=None, strict=True, chunk=20000):
    """Adaptive integral of ``f`` over ``[a, b]``."""
    spec = spec or QuadratureSpec()
    if not (np.isfinite(a) and np.isfinite(b)) or b < a:
        raise ValueError("integration limits must be finite with a <= b")
    if a == b:
        out = f(np.array([a]))
        ncomp = np.asarray(out).shape[0] if np.ndim(out) == 2 else None
        return QuadResult(0.0 if ncomp is None else np.zeros(ncomp), 0.0, 0, 0)
    lo = np.array([a], float)
    hi = np.array([b], float)
    depth = np.zeros(1, int)
    acc_val = None
    acc_abs = None
    acc_err = 0.0
    nevals = 0
    length = b - a
    done_cells = []
    vector = False
    converged = True
    while lo.size:
        vals, vals_abs, errs = [], [], []
        for s in range(0, lo.size, chunk):
            l, h = lo[s:s + chunk], hi[s:s + chunk]
            mid, half = 0.5 * (l + h), 0.5 * (h - l)
            nodes = mid[:, None] + half[:, None] * NODES[None, :]
            raw, vector = _with_components(f(nodes), nodes.shape)
            nevals += nodes.size
            k = np.einsum("cij,j->ci", raw, KRONROD) * half
            g = np.einsum("cij,j->ci", raw, GAUSS) * half
            kabs = np.einsum("cij,j->ci", np.abs(raw), KRONROD) * half
            vals.append(k)
            vals_abs.append(kabs)
            errs.append(np.abs(k - g))
        k = np.concatenate(vals, axis=1)
        kabs = np.concatenate(vals_abs, axis=1)
        err = np.concatenate(errs, axis=1)
        if not np.all(np.isfinite(k)):
            raise FloatingPointError("integrand returned non-finite values")
        if acc_val is None:
            acc_val = np.zeros(k.shape[0])
            acc_abs = np.zeros(k.shape[0])
        total = acc_val + k.sum(axis=1)
        scale = max(np.max(acc_abs + kabs.sum(axis=1)), np.max(np.abs(total)))
        tol = max(spec.atol, spec.rtol * scale)
        cell_err = err.max(axis=0)
        ok = cell_err <= tol * (hi - lo) / length
        too_deep = depth >= spec.max_depth
        if np.any(too_deep & ~ok) or lo.size > spec.max_cells:
            converged = False
            ok = np.ones_like(ok)
        acc_val = acc_val + k[:, ok].sum(axis=1)
        acc_abs = acc_abs + kabs[:, ok].sum(axis=1)
        acc_err += cell_err[ok].sum()
        done_cells.extend(zip(lo[ok], hi[ok]))
        bad = ~ok
        m = 0.5 * (lo[bad] + hi[bad])
        lo, hi = np.concatenate([lo[bad], m]), np.concatenate([m, hi[bad]])
        depth = np.concatenate([depth[bad] + 1, depth[bad] + 1])
    value = acc_val if vector else float(acc_val[0])
    res = QuadResult(value, float(acc_err), len(done_cells), nevals, converged, done_cells)
    if not converged and strict:
        raise QuadratureError("tolerance not reached at maximum depth", res)
    return res


def integrate_2d(f, urange, vrange, spec=None, strict=True, chunk=2000):
    """Adaptive tensor-product integral of ``f(u, v)`` over a rectangle."""
    spec = spec or QuadratureSpec()
    (u0, u1), (v0, v1) = urange, vrange
    for lim in (u0, u1, v0, v1):
        if not np.isfinite(lim):
            raise ValueError("integration limits must be finite")
    if u1 < u0 or v1 < v0:
        raise ValueError("empty rectangle")
    area = (u1 - u0) * (v1 - v0)
    cells = np.array([[u0, u1, v0, v1]], float)
    depth = np.zeros(1, int)
    acc_val = None
    acc_abs = None
    acc_err = 0.0
    nevals = 0
    done = []
    vector = False
    converged = True
    if area == 0:
        return QuadResult(0.0, 0.0, 0, 0)
    while len(cells):
        ks, kabs_l, eu_l, ev_l = [], [], [], []
        for s in range(0, len(cells), chunk):
            c = cells[s:s + chunk]
            mu, hu = 0.5 * (c[:, 0] + c[:, 1]), 0.5 * (c[:, 1] - c[:, 0])
            mv, hv = 0.5 * (c[:, 2] + c[:, 3]), 0.5 * (c[:, 3] - c[:, 2])
            U = mu[:, None, None] + hu[:, None, None] * NODES[None, :, None]
            V = mv[:, None, None] + hv[:, None, None] * NODES[None, None, :]
            U, V = np.broadcast_arrays(U, V)
            raw, vector = _with_components(f(U, V), U.shape)
            nevals += U.size
            jac = hu * hv
            kk = np.einsum("cnij,i,j->cn", raw, KRONROD, KRONROD) * jac
            gk = np.einsum("cnij,i,j->cn", raw, GAUSS, KRONROD) * jac
            kg = np.einsum("cnij,i,j->cn", raw, KRONROD, GAUSS) * jac
            ka = np.einsum("cnij,i,j->cn", np.abs(raw), KRONROD, KRONROD) * jac
            ks.append(kk)
            kabs_l.append(ka)
            eu_l.append(np.abs(kk - gk))
            ev_l.append(np.abs(kk - kg))
        kk = np.concatenate(ks, axis=1)
        ka = np.concatenate(kabs_l, axis=1)
        eu = np.concatenate(eu_l, axis=1).max(axis=0)
        ev = np.concatenate(ev_l, axis=1).max(axis=0)
        if not np.all(np.isfinite(kk)):
            raise FloatingPointError("integrand returned non-finite values")
        if acc_val is None:
            acc_val = np.zeros(kk.shape[0])
            acc_abs = np.zeros(kk.shape[0])
        total = acc_val + kk.sum(axis=1)
        scale = max(np.max(acc_abs + ka.sum(axis=1)), np.max(np.abs(total)))
        tol = max(spec.atol, spec.rtol * scale)
        cell_err = eu + ev
        cell_area = (cells[:, 1] - cells[:, 0]) * (cells[:, 3] - cells[:, 2])
        ok = cell_err <= tol * cell_area / area
        if np.any((depth >= spec.max_depth) & ~ok) or len(cells) > spec.max_cells:
            converged = False
            ok = np.ones_like(ok)
        acc_val = acc_val + kk[:, ok].sum(axis=1)
        acc_abs = acc_abs + ka[:, ok].sum(axis=1)
        acc_err += cell_err[ok].sum()
        done.extend(map(tuple, cells[ok]))
        bad = ~ok
        c = cells[bad]
        split_u = eu[bad] >= ev[bad]
        mid_u = 0.5 * (c[:, 0] + c[:, 1])
        mid_v = 0.5 * (c[:, 2] + c[:, 3])
        first = c.copy()
        second = c.copy()
        first[split_u, 1] = mid_u[split_u]
        second[split_u, 0] = mid_u[split_u]
        first[~split_u, 3] = mid_v[~split_u]
        second[~split_u, 2] = mid_v[~split_u]
        cells = np.concatenate([first, second])
        depth = np.concatenate([depth[bad] + 1, depth[bad] + 1])
    value = acc_val if vector else float(acc_val[0])
    res = QuadResult(value, float(acc_err), len(done), nevals, converged, done)
    if not converged and strict:
        raise QuadratureError("tolerance not reached at maximum depth", res)
    return res


def gauss_legendre_box(f, ranges, n, chunk=200_000):
    """Fixed tensor Gauss-Legendre rule with ``n`` nodes per axis.

    Used for higher-dimensional integrals where adaptivity is not needed.
    Nodes are fed to ``f`` in flat chunks; ``f`` may return a leading
    component axis, in which case an array of integrals is returned.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    grids, weights = [], []
    for lo, hi in ranges:
        grids.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
        weights.append(0.5 * (hi - lo) * w)
    d = len(ranges)
    total = None
    vector = False
    for start in range(0, n**d, chunk):
        idx = np.unravel_index(np.arange(start, min(start + chunk, n**d)), (n,) * d)
        pts = [g[i] for g, i in zip(grids, idx)]
        wts = np.prod([wt[i] for wt, i in zip(weights, idx)], axis=0)
        raw, vector = _with_components(f(*pts), wts.shape)
        part = raw @ wts
        total = part if total is None else total + part
    return total if vector else float(total[0])


def compact_trapezoid_2d(f, urange, vrange, spec=None, n0=64, max_n=2048):
    """Trapezoid rule for integrands vanishing to all orders on the boundary.

    Such integrands behave like periodic ones, so the rule converges faster
    than any power of the spacing.  The grid is doubled (reusing old nodes)
    until consecutive values agree; the last change is the error estimate.
    """
    spec = spec or QuadratureSpec()
    (u0, u1), (v0, v1) = urange, vrange
    if not (u1 > u0 and v1 > v0):
        raise ValueError("empty rectangle")

    def block(iu, iv, n):
        U, V = np.meshgrid(u0 + (u1 - u0) * iu / n, v0 + (v1 - v0) * iv / n, indexing="ij")
        raw, vector = _with_components(f(U, V), U.shape)
        if not np.all(np.isfinite(raw)):
            raise FloatingPointError("integrand returned non-finite values")
        return raw.sum(axis=(1, 2)), np.abs(raw).sum(axis=(1, 2)), vector, U.size

    n = n0
    inner = np.arange(1, n)
    total, total_abs, vector, nevals = block(inner, inner, n)
    value = total * ((u1 - u0) / n) * ((v1 - v0) / n)
    err = np.inf
    while True:
        if n * 2 > max_n:
            converged = False
            break
        odd = np.arange(1, 2 * n, 2)
        even = np.arange(2, 2 * n, 2)
        parts = [block(odd, odd, 2 * n), block(odd, even, 2 * n), block(even, odd, 2 * n)]
        for s, sa, _, ne in parts:
            total = total + s
            total_abs = total_abs + sa
            nevals += ne
        n *= 2
        new = total * ((u1 - u0) / n) * ((v1 - v0) / n)
        err = float(np.max(np.abs(new - value)))
        value = new
        scale = float(np.max(total_abs)) * ((u1 - u0) / n) * ((v1 - v0) / n)
        if err <= max(spec.atol, spec.rtol * scale):
            converged = True
            break
    out = value if vector else float(value[0])
    res = QuadResult(out, err, n * n, nevals, converged)
    if not converged:
        raise QuadratureError("trapezoid rule did not settle", res)
    return res
