"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` holds the Taylor coefficients of a function of ``nvars``
variables up to total degree ``order`` at a batch of base points.  The
coefficient array has shape ``(M, *batch)`` where ``M`` is the number of
monomials, so every operation is vectorised over the batch.

Elementary functions act on jets through :meth:`Jet.compose`, which only
needs the derivatives of the scalar function at the base values.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


class DomainError(ValueError):
    """Raised when a function is evaluated outside its domain."""

    def __init__(self, message, subexpr=None):
        super().__init__(message)
        self.subexpr = subexpr

    def __str__(self):
        msg = super().__str__()
        if self.subexpr:
            return f"{msg} in '{self.subexpr}'"
        return msg


class _Basis:
    def __init__(self, nvars, order):
        self.nvars = nvars
        self.order = order
        multi = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), deg):
                alpha = [0] * nvars
                for i in combo:
                    alpha[i] += 1
                multi.append(tuple(alpha))
        self.multi = multi
        self.index = {a: i for i, a in enumerate(multi)}
        self.size = len(multi)
        self.degree = np.array([sum(a) for a in multi])
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in a) for a in multi], dtype=float
        )
        pairs = []
        for i, a in enumerate(multi):
            for j, b in enumerate(multi):
                s = tuple(x + y for x, y in zip(a, b))
                if sum(s) <= order:
                    pairs.append((self.index[s], i, j))
        pairs.sort()
        k, i, j = (np.array(v) for v in zip(*pairs))
        self.mul_i = i
        self.mul_j = j
        self.mul_starts = np.searchsorted(k, np.arange(self.size))

    def diff_map(self, var):
        """Index maps for differentiating along ``var``."""
        lower = basis(self.nvars, self.order - 1)
        src, dst, fac = [], [], []
        for idx, a in enumerate(self.multi):
            if a[var] == 0:
                continue
            b = list(a)
            b[var] -= 1
            src.append(idx)
            dst.append(lower.index[tuple(b)])
            fac.append(a[var])
        return lower, np.array(src, dtype=int), np.array(dst, dtype=int), np.array(fac, float)


@lru_cache(maxsize=None)
def basis(nvars, order):
    return _Basis(nvars, order)


def _as_array(x):
    return np.asarray(x, dtype=float)


class Jet:
    """Truncated Taylor polynomial with vectorised coefficients."""

    __array_priority__ = 100
    __slots__ = ("c", "basis")

    def __init__(self, coeffs, nvars, order):
        self.c = coeffs
        self.basis = basis(nvars, order)

    # construction
    @classmethod
    def variables(cls, values, order):
        """Seed jets for independent variables at the given base values."""
        values = [_as_array(v) for v in values]
        shape = np.broadcast_shapes(*(v.shape for v in values))
        n = len(values)
        b = basis(n, order)
        out = []
        for i, v in enumerate(values):
            c = np.zeros((b.size,) + shape)
            c[0] = v
            if order >= 1:
                e = [0] * n
                e[i] = 1
                c[b.index[tuple(e)]] = 1.0
            out.append(cls(c, n, order))
        return tuple(out)

    @classmethod
    def constant(cls, value, nvars, order):
        value = _as_array(value)
        b = basis(nvars, order)
        c = np.zeros((b.size,) + value.shape)
        c[0] = value
        return cls(c, nvars, order)

    def like(self, value):
        return Jet.constant(value, self.nvars, self.order)

    # properties
    @property
    def nvars(self):
        return self.basis.nvars

    @property
    def order(self):
        return self.basis.order

    @property
    def value(self):
        return self.c[0]

    @property
    def shape(self):
        return self.c.shape[1:]

    def deriv(self, *vars_):
        """Partial derivative at the base point, e.g. ``deriv(0, 1)``."""
        alpha = [0] * self.nvars
        for v in vars_:
            alpha[v] += 1
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError("derivative order exceeds jet order")
        i = self.basis.index[alpha]
        return self.c[i] * self.basis.factorial[i]

    def grad(self):
        return np.stack([self.deriv(i) for i in range(self.nvars)])

    def diff(self, var):
        """Jet of the partial derivative along ``var`` (one order lower)."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        lower, src, dst, fac = self.basis.diff_map(var)
        c = np.zeros((lower.size,) + self.shape)
        fac = fac.reshape((-1,) + (1,) * len(self.shape))
        c[dst] = self.c[src] * fac
        return Jet(c, self.nvars, self.order - 1)

    def truncate(self, order):
        if order > self.order:
            raise ValueError("cannot raise jet order")
        b = basis(self.nvars, order)
        return Jet(self.c[: b.size].copy(), self.nvars, order)

    def __repr__(self):
        return f"Jet(nvars={self.nvars}, order={self.order}, value={self.value!r})"

    # arithmetic
    def _check(self, other):
        if other.basis is not self.basis:
            raise ValueError("jets over different bases")

    def __neg__(self):
        return Jet(-self.c, self.nvars, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.c + other.c, self.nvars, self.order)
        other = _as_array(other)
        c = self.c + np.zeros_like(other)[None]
        c[0] = c[0] + other
        return Jet(c, self.nvars, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            b = self.basis
            if b.order <= 1:
                a0, b0 = self.c[:1], other.c[:1]
                return Jet(np.concatenate([a0 * b0, a0 * other.c[1:] + self.c[1:] * b0]),
                           self.nvars, self.order)
            prod = self.c[b.mul_i] * other.c[b.mul_j]
            return Jet(np.add.reduceat(prod, b.mul_starts, axis=0), self.nvars, self.order)
        other = _as_array(other)
        return Jet(self.c * other[None], self.nvars, self.order)

    __rmul__ = __mul__

    def reciprocal(self):
        x = self.value
        if np.any(x == 0):
            raise DomainError("division by zero")
        return self.compose(_recip_derivs(x, self.order))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = _as_array(other)
        if np.any(other == 0):
            raise DomainError("division by zero")
        return Jet(self.c / other[None], self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        return power(self, float(p))

    def compose(self, derivs):
        """Apply a scalar function given its derivatives at ``self.value``.

        ``derivs[k]`` is the k-th derivative; at least ``order + 1`` entries
        are required.
        """
        n = self.order
        if len(derivs) < n + 1:
            raise ValueError("not enough derivatives for jet order")
        shape = np.broadcast_shapes(self.shape, *(np.shape(d) for d in derivs[: n + 1]))
        delta_c = np.broadcast_to(self.c, (self.basis.size,) + shape).copy()
        delta_c[0] = 0.0
        delta = Jet(delta_c, self.nvars, n)
        c = np.zeros((self.basis.size,) + shape)
        c[0] = derivs[0]
        if n >= 1:
            c = c + delta_c * derivs[1]
            power_k = delta
            for k in range(2, n + 1):
                power_k = power_k * delta
                c = c + power_k.c * (np.asarray(derivs[k]) / math.factorial(k))
        return Jet(c, self.nvars, n)


def _recip_derivs(x, n):
    x = _as_array(x)
    return [((-1) ** k) * math.factorial(k) / x ** (k + 1) for k in range(n + 1)]


def is_jet(x):
    return isinstance(x, Jet)


def value_of(x):
    return x.value if isinstance(x, Jet) else _as_array(x)


def _order(x):
    return x.order if isinstance(x, Jet) else 0


def apply(x, derivs_fn):
    """Evaluate a scalar function on a value or jet.

    ``derivs_fn(values, n)`` must return the list of the first ``n + 1``
    derivatives at ``values``.
    """
    if isinstance(x, Jet):
        return x.compose(derivs_fn(x.value, x.order))
    return derivs_fn(_as_array(x), 0)[0]


# Derivative tables for elementary functions.  Each returns n+1 arrays.

def _sin_derivs(x, n):
    s, c = np.sin(x), np.cos(x)
    cyc = [s, c, -s, -c]
    return [cyc[k % 4] for k in range(n + 1)]


def _cos_derivs(x, n):
    s, c = np.sin(x), np.cos(x)
    cyc = [c, -s, -c, s]
    return [cyc[k % 4] for k in range(n + 1)]


def _exp_derivs(x, n):
    e = np.exp(x)
    if not np.all(np.isfinite(e)):
        raise DomainError("exp overflow")
    return [e] * (n + 1)


def _sinh_derivs(x, n):
    s, c = np.sinh(x), np.cosh(x)
    return [s if k % 2 == 0 else c for k in range(n + 1)]


def _cosh_derivs(x, n):
    s, c = np.sinh(x), np.cosh(x)
    return [c if k % 2 == 0 else s for k in range(n + 1)]


def _log_derivs(x, n):
    if np.any(x <= 0):
        raise DomainError("log of non-positive argument")
    out = [np.log(x)]
    for k in range(1, n + 1):
        out.append(((-1) ** (k - 1)) * math.factorial(k - 1) / x**k)
    return out


@lru_cache(maxsize=None)
def _chain_coefficients(rhs, n):
    """Coefficients of the polynomials P_k with f^(k) = P_k(f)."""
    P = np.polynomial.polynomial
    out = []
    pk = np.array([0.0, 1.0])
    for _ in range(n):
        pk = P.polymul(P.polyder(pk), rhs)
        out.append(pk)
    return tuple(out)


def _poly_chain(f0, rhs, n):
    """Derivatives of f where f' = rhs(f) for a polynomial rhs.

    ``rhs`` is a coefficient tuple (lowest degree first); returns
    [f, f', ..., f^(n)].
    """
    polyval = np.polynomial.polynomial.polyval
    return [f0] + [polyval(f0, c) for c in _chain_coefficients(rhs, n)]


_TAN_RHS = (1.0, 0.0, 1.0)
_TANH_RHS = (1.0, 0.0, -1.0)
_COT_RHS = (-1.0, 0.0, -1.0)
POLE_TOL = 1e-13


def _tan_derivs(x, n):
    c = np.cos(x)
    if np.any(np.abs(c) < POLE_TOL):
        raise DomainError("tan evaluated at a pole")
    return _poly_chain(np.sin(x) / c, _TAN_RHS, n)


def _cot_derivs(x, n):
    s = np.sin(x)
    if np.any(np.abs(s) < POLE_TOL):
        raise DomainError("cot evaluated at a pole")
    return _poly_chain(np.cos(x) / s, _COT_RHS, n)


def _tanh_derivs(x, n):
    return _poly_chain(np.tanh(x), _TANH_RHS, n)


def _atan_derivs(x, n):
    out = [np.arctan(x)]
    if n >= 1:
        (e,) = Jet.variables([x], n - 1)
        g = (1.0 + e * e).reciprocal()
        for k in range(n):
            out.append(g.c[k] * math.factorial(k))
    return out


def _power_derivs(x, p, n):
    integral = float(p).is_integer()
    if integral and p < 0 and np.any(x == 0):
        raise DomainError("negative power of zero")
    if not integral:
        if np.any(x < 0):
            raise DomainError("fractional power of negative argument")
        if n > 0 and p < n and np.any(x == 0):
            raise DomainError("fractional power is not differentiable at zero")
    out = []
    coef = 1.0
    for k in range(n + 1):
        if integral and p >= 0 and k > p:
            out.append(np.zeros_like(x))
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            out.append(coef * np.power(x, p - k))
        coef *= p - k
    return out


def sin(x):
    return apply(x, _sin_derivs)


def cos(x):
    return apply(x, _cos_derivs)


def tan(x):
    return apply(x, _tan_derivs)


def cot(x):
    return apply(x, _cot_derivs)


def tanh(x):
    return apply(x, _tanh_derivs)


def sinh(x):
    return apply(x, _sinh_derivs)


def cosh(x):
    return apply(x, _cosh_derivs)


def exp(x):
    return apply(x, _exp_derivs)


def log(x):
    return apply(x, _log_derivs)


def atan(x):
    return apply(x, _atan_derivs)


def sqrt(x):
    return power(x, 0.5)


def power(x, p):
    """``x**p`` for a constant real exponent."""
    p = float(p)
    if isinstance(x, Jet) and p.is_integer() and 0 <= p <= 3:
        if p == 0:
            return x.like(np.ones_like(x.value))
        out = x
        for _ in range(int(p) - 1):
            out = out * x
        return out
    return apply(x, lambda v, n: _power_derivs(v, p, n))


def hypot(a, b):
    return sqrt(a * a + b * b)


class UFunc:
    """Base for scalar functions of one variable that act on jets."""

    def derivs(self, x, n):
        raise NotImplementedError

    def __call__(self, x):
        return apply(x, self.derivs)

    def derivative(self, k=1):
        return Shifted(self, k)


class Shifted(UFunc):
    """The k-th derivative of a :class:`UFunc`."""

    def __init__(self, base, k):
        self.base = base
        self.k = k

    def derivs(self, x, n):
        return self.base.derivs(x, n + self.k)[self.k:]


def solve_jet(residual, root, slope, iterations):
    """Lift a scalar root to a jet by chord iteration.

    ``residual(t)`` maps a jet ``t`` to the residual jet, ``root`` is the
    converged base value and ``slope`` the derivative of the residual with
    respect to ``t`` at the root.  Each pass fixes one more Taylor order.
    """
    t = root
    for _ in range(iterations):
        t = t - residual(t) / slope
    return t
