import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbern.gexpr import (
    ExprArityError,
    ExprSyntaxError,
    builtin,
    eval_jet,
    parse,
    to_string,
)
from hbern.jets import DomainError

FUNCS = ["sin", "cos", "tanh", "exp", "atan"]


def expr_text(depth=3):
    leaf = st.one_of(
        st.sampled_from(["t", "pi", "e"]),
        st.floats(0.1, 9.9).map(lambda v: f"{v:.3f}"),
    )
    if depth == 0:
        return leaf

    sub = expr_text(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(sub, st.sampled_from("+-*/"), sub).map(lambda p: f"({p[0]} {p[1]} {p[2]})"),
        st.tuples(st.sampled_from(FUNCS), sub).map(lambda p: f"{p[0]}({p[1]})"),
        sub.map(lambda s: f"-({s})"),
        sub.map(lambda s: f"({s})^2"),
    )


def test_parse_examples():
    f = parse("tan(tanh(t))")
    assert f(0.3) == pytest.approx(math.tan(math.tanh(0.3)))
    g = parse("0.5*t + 1")
    assert g(2.0) == 2.0


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as e:
        parse("t^")
    assert e.value.offset == 2


@pytest.mark.parametrize("src", ["foo(t)", "t +* 2", "(t", "sin t", "q + 1"])
def test_rejects_bad_input(src):
    with pytest.raises((ExprSyntaxError, ExprArityError, ValueError)):
        parse(src, ("t",))


def test_jet_oracles():
    j = eval_jet(parse("t^2"), 3.0)
    assert (j.value, j.d1, j.d2, j.d3) == (9.0, 6.0, 2.0, 0.0)
    j = eval_jet(parse("tan(tanh(t))"), 0.0)
    assert j.value == 0 and j.d1 == pytest.approx(1, abs=1e-15) and j.d2 == pytest.approx(0, abs=1e-15)
    j = eval_jet(parse("cot(pi/2 - t)"), 0.0)
    assert j.value == pytest.approx(0, abs=1e-15) and j.d1 == pytest.approx(1, rel=1e-14)


def test_two_variable_jet():
    j = eval_jet(parse("x*y/2", ("x", "y")), (2.0, 3.0))
    assert j.value == 3.0
    assert np.allclose(j.d1, [1.5, 1.0])
    assert np.allclose(j.d2, [[0, 0.5], [0.5, 0]])


def test_right_associative_power():
    assert parse("2^3^2", ("t",))(0.0) == 2 ** 9


def test_poles_raise():
    f = parse("cot(t)")
    for k in (-1, 0, 1, 2):
        with pytest.raises(DomainError):
            eval_jet(f, k * math.pi)
    with pytest.raises(DomainError):
        parse("log(t)")(-1.0)


@given(expr_text())
def test_print_parse_round_trip(src):
    f = parse(src, ("t",))
    g = parse(to_string(f), ("t",))
    assert g == f
    assert to_string(g) == to_string(f)


def _central(f, t, h=1e-4):
    return (f(t + h) - f(t - h)) / (2 * h), (f(t + h) - 2 * f(t) + f(t - h)) / (h * h)


BUILTIN_DOMAINS = {
    "tan_tanh": (builtin("tan_tanh"), (-3, 3)),
    "affine": (builtin("affine", 0.5, 1.0), (-3, 3)),
    "cot_shift": (builtin("cot_shift"), (-1.4, 1.4)),
    "square_pos": (builtin("square_pos"), (0.1, 3)),
}


@pytest.mark.parametrize("name", sorted(BUILTIN_DOMAINS))
def test_builtin_jets_match_finite_differences(name):
    f, (lo, hi) = BUILTIN_DOMAINS[name]
    rng = np.random.default_rng(7)
    for t in rng.uniform(lo, hi, 100):
        d = f.derivs(t, 3)
        fd1, fd2 = _central(f, t)
        assert abs(d[1] - fd1) <= 1e-6 * (1 + abs(d[1]))
        assert abs(d[2] - fd2) <= 1e-5 * (1 + abs(d[2]))


@pytest.mark.parametrize("name", sorted(BUILTIN_DOMAINS))
def test_builtin_agrees_with_parsed_source(name):
    f, (lo, hi) = BUILTIN_DOMAINS[name]
    g = parse(f.source, ("t",))
    t = np.linspace(lo, hi, 50)
    for a, b in zip(f.derivs(t, 3), g.derivs(t, 3)):
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@given(expr_text(2), st.floats(-1.0, 1.0))
def test_parsed_jets_match_finite_differences(src, t):
    f = parse(src, ("t",))
    try:
        d = f.derivs(t, 2)
        vals = [f(t + s) for s in (-1e-4, 0, 1e-4)]
    except DomainError:
        return
    if max(abs(v) for v in vals) > 1e6:
        return
    fd1 = (vals[2] - vals[0]) / 2e-4
    assert abs(d[1] - fd1) <= 1e-6 * (1 + abs(d[1])) + 1e-7 * max(1.0, abs(d[2]), abs(vals[1]))


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin("nope")
    with pytest.raises(ExprArityError):
        builtin("affine", 1.0)
