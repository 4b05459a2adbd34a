"""Scalar expressions with truncated-Taylor evaluation.

Expressions are parsed into small immutable trees.  A tree evaluates on
plain arrays or on :class:`~hbern.jets.Jet` inputs, which gives exact
derivatives up to the jet order.  A few closed-form profiles used
throughout the package are available through :func:`builtin` with
hand-written derivatives, so they can serve as an independent check of the
generic path.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import jets
from .jets import DomainError, Jet, UFunc


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``offset`` points at the bad character."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprArityError(ValueError):
    pass


# tree nodes

@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError("numeric literals must be finite and non-negative")


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


FUNCTIONS = {
    "sin": jets.sin,
    "cos": jets.cos,
    "tan": jets.tan,
    "cot": jets.cot,
    "tanh": jets.tanh,
    "sinh": jets.sinh,
    "cosh": jets.cosh,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
    "atan": jets.atan,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(src):
    pos = 0
    out = []
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            start = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[start]!r}", start)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src, variables):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, val, off = self.take()
        if val != text:
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", off)

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Bin("^", base, self.unary())
        return base

    def primary(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if val not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {val!r}", off)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise ExprArityError(f"{val} takes 1 argument, got {len(args)}")
                return Call(val, tuple(args))
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs an argument list", off)
            if val in CONSTANTS and (self.variables is None or val not in self.variables):
                return Const(val)
            if self.variables is not None and val not in self.variables:
                raise ExprSyntaxError(f"unknown variable {val!r}", off)
            return Var(val)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", off)


# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node):
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Num) and node.value < 0:
        return _PREC["neg"]
    return _PREC["atom"]


def _fmt_num(v):
    if v == int(v) and v < 1e15:
        return str(int(v))
    return repr(float(v))


def to_text(node):
    """Render a tree so that parsing the text gives the same tree back."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        if _prec(node.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(node, Call):
        return f"{node.fn}(" + ", ".join(to_text(a) for a in node.args) + ")"
    if isinstance(node, Bin):
        p = _PREC[node.op]
        left, right = to_text(node.left), to_text(node.right)
        if node.op == "^":
            # right associative; the base must be an atom
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < _PREC["neg"]:
                right = f"({right})"
            return f"{left}^{right}"
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def free_variables(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.arg)
    if isinstance(node, Bin):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        out = set()
        for a in node.args:
            out |= free_variables(a)
        return out
    return set()


# evaluation

def _evaluate(node, env):
    try:
        return _eval_node(node, env)
    except DomainError as err:
        if err.subexpr is None:
            err.subexpr = to_text(node)
        raise


def _eval_node(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_evaluate(node.arg, env)
    if isinstance(node, Call):
        arg = _evaluate(node.args[0], env)
        return FUNCTIONS[node.fn](arg if isinstance(arg, Jet) else np.asarray(arg, float))
    a = _evaluate(node.left, env)
    if node.op == "^":
        if not free_variables(node.right):
            p = float(_evaluate(node.right, {}))
            if not isinstance(a, Jet):
                return jets.power(np.asarray(a, float), p)
            return jets.power(a, p)
        b = _evaluate(node.right, env)
        if not isinstance(a, Jet) and not isinstance(b, Jet):
            a = np.asarray(a, float)
        return jets.exp(b * jets.log(a))
    b = _evaluate(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if not isinstance(b, Jet):
        b = np.asarray(b, float)
        if np.any(b == 0):
            raise DomainError("division by zero")
    return a / b


DEFAULT_ORDER = ("t", "x", "y", "s", "u", "v", "r")


def _default_variables(tree):
    names = free_variables(tree)

    def key(name):
        if name in DEFAULT_ORDER:
            return (0, DEFAULT_ORDER.index(name), name)
        m = re.fullmatch(r"([a-z]+)(\d+)", name)
        if m:
            return (1, m.group(1), int(m.group(2)))
        return (2, name, 0)

    return tuple(sorted(names, key=key))


class ScalarFn(UFunc):
    """A parsed scalar function of named variables."""

    def __init__(self, tree, variables, source=None):
        self.tree = tree
        self.variables = tuple(variables)
        self.source = source if source is not None else to_text(tree)

    @property
    def arity(self):
        return len(self.variables)

    def __repr__(self):
        return f"ScalarFn({self.text()!r}, variables={self.variables})"

    def __eq__(self, other):
        return (
            isinstance(other, ScalarFn)
            and self.tree == other.tree
            and self.variables == other.variables
        )

    def __hash__(self):
        return hash((self.tree, self.variables))

    def text(self):
        return to_text(self.tree)

    def __call__(self, *args):
        if len(args) != self.arity:
            raise ExprArityError(f"expected {self.arity} arguments, got {len(args)}")
        env = {}
        for name, a in zip(self.variables, args):
            env[name] = a if isinstance(a, Jet) else np.asarray(a, float)
        out = _evaluate(self.tree, env)
        if isinstance(out, Jet):
            return out
        shape = np.broadcast_shapes(*(np.shape(value_of(a)) for a in args)) if args else ()
        out = np.broadcast_to(np.asarray(out, float), shape)
        if not np.all(np.isfinite(out)):
            raise DomainError("non-finite value", self.text())
        return out if out.shape else float(out)

    def derivs(self, x, n):
        if self.arity != 1:
            raise ExprArityError("derivs is defined for functions of one variable")
        (seed,) = Jet.variables([x], n)
        j = _evaluate(self.tree, {self.variables[0]: seed})
        if not isinstance(j, Jet):
            j = seed.like(np.broadcast_to(np.asarray(j, float), np.shape(x)))
        out = [j.c[k] * math.factorial(k) for k in range(n + 1)]
        for d in out:
            if not np.all(np.isfinite(d)):
                raise DomainError("non-finite derivative", self.text())
        return out


def value_of(x):
    return x.value if isinstance(x, Jet) else np.asarray(x, float)


def parse(src, variables=None):
    """Parse ``src`` into a :class:`ScalarFn`.

    ``variables`` fixes the argument order; when omitted the free variables
    are ordered canonically (``t, x, y, s, u, v, r`` first).
    """
    if not isinstance(src, str):
        raise TypeError("expression source must be a string")
    allowed = None if variables is None else tuple(variables)
    tree = _Parser(src, allowed).parse()
    if variables is None:
        variables = _default_variables(tree)
    return ScalarFn(tree, variables, source=src)


def to_string(fn):
    return to_text(fn.tree) if isinstance(fn, ScalarFn) else fn.text()


@dataclass(frozen=True)
class Jet3:
    """Derivatives up to order three at one point.

    For one variable the fields are scalars; for several they are the
    gradient, Hessian and third-derivative tensor.
    """

    value: float
    d1: object
    d2: object
    d3: object


def eval_jet(fn, point, order=3):
    """Value and derivatives of ``fn`` up to ``order`` (at most 3) at a point."""
    point = np.atleast_1d(np.asarray(point, float))
    n = len(point)
    if hasattr(fn, "arity") and fn.arity != n:
        raise ExprArityError(f"function has arity {fn.arity}, point has {n} coordinates")
    if n == 1:
        d = fn.derivs(point[0], order)
        d = [float(v) for v in d] + [None] * (3 - order)
        return Jet3(d[0], d[1], d[2], d[3])
    seeds = Jet.variables(list(point), order)
    j = fn(*seeds)
    if not isinstance(j, Jet):
        j = seeds[0].like(j)
    grad = np.array([j.deriv(i) for i in range(n)]) if order >= 1 else None
    hess = None
    third = None
    if order >= 2:
        hess = np.array([[j.deriv(i, k) for k in range(n)] for i in range(n)])
    if order >= 3:
        third = np.array(
            [[[j.deriv(i, k, m) for m in range(n)] for k in range(n)] for i in range(n)]
        )
    return Jet3(float(j.value), grad, hess, third)


# closed-form profiles with hand-written derivatives

class ClosedForm(ScalarFn):
    """Univariate profile whose derivatives are coded by hand."""

    def __init__(self, name, source, derivs_fn, params=()):
        tree = _Parser(source, ("t",)).parse()
        super().__init__(tree, ("t",), source=source)
        self.name = name
        self.params = tuple(params)
        self._derivs = derivs_fn

    def __repr__(self):
        return f"builtin({self.name!r}{''.join(', ' + repr(p) for p in self.params)})"

    def __call__(self, t):
        if isinstance(t, Jet):
            return t.compose(self.derivs(t.value, t.order))
        out = self._derivs(np.asarray(t, float), 0)[0]
        return out if np.ndim(out) else float(out)

    def derivs(self, x, n):
        if n > 3:
            raise ValueError("closed-form profiles provide derivatives up to order 3")
        return self._derivs(np.asarray(x, float), n)[: n + 1]


def _tan_tanh(t, n):
    th = np.tanh(t)
    g = np.tan(th)
    a = 1 + g * g
    s = 1 - th * th
    s1 = -2 * th * s
    s2 = -2 * s * s - 2 * th * s1
    g1 = a * s
    a1 = 2 * g * g1
    g2 = 2 * g * a * s * s + a * s1
    g3 = 2 * g1 * a * s * s + 2 * g * a1 * s * s + 4 * g * a * s * s1 + a1 * s1 + a * s2
    return [g, g1, g2, g3]


def _affine(alpha, beta):
    def fn(t, n):
        z = np.zeros_like(t)
        return [alpha * t + beta, z + alpha, z, z]

    return fn


def _cot_shift(t, n):
    arg = np.pi / 2 - t
    s = np.sin(arg)
    if np.any(np.abs(s) < jets.POLE_TOL):
        raise DomainError("cot evaluated at a pole", "cot(pi/2 - t)")
    g = np.cos(arg) / s
    a = 1 + g * g
    return [g, a, 2 * g * a, 2 * a * (1 + 3 * g * g)]


def _square(t, n):
    z = np.zeros_like(t)
    return [t * t, 2 * t, z + 2.0, z]


def _signed(v):
    return _fmt_num(v) if v >= 0 else f"(-{_fmt_num(-v)})"


def builtin(name, *params):
    """Closed-form profiles: ``tan_tanh``, ``affine(alpha, beta)``,
    ``cot_shift`` and ``square_pos``."""
    if name == "tan_tanh":
        return ClosedForm(name, "tan(tanh(t))", _tan_tanh)
    if name == "affine":
        if len(params) != 2:
            raise ExprArityError("affine takes (alpha, beta)")
        alpha, beta = (float(p) for p in params)
        src = f"{_signed(alpha)}*t + {_signed(beta)}"
        return ClosedForm(name, src, _affine(alpha, beta), (alpha, beta))
    if name == "cot_shift":
        return ClosedForm(name, "cot(pi/2 - t)", _cot_shift)
    if name == "square_pos":
        return ClosedForm(name, "t^2", _square)
    raise KeyError(f"unknown builtin {name!r}")


def as_function(spec, variables=("t",)):
    """Accept a ScalarFn, UFunc, or expression text."""
    if isinstance(spec, (ScalarFn, UFunc)):
        return spec
    if isinstance(spec, str):
        return parse(spec, variables)
    raise TypeError(f"cannot interpret {spec!r} as a function")
