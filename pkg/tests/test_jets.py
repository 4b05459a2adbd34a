import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbern import jets
from hbern.jets import Jet

x_vals = st.floats(-1.2, 1.2)


@given(x_vals, x_vals)
def test_product_rule(a, b):
    X, Y = Jet.variables([a, b], 2)
    f = jets.sin(X) * jets.exp(Y)
    assert f.deriv(0) == pytest.approx(math.cos(a) * math.exp(b))
    assert f.deriv(0, 1) == pytest.approx(math.cos(a) * math.exp(b))
    assert f.deriv(0, 0) == pytest.approx(-math.sin(a) * math.exp(b))


@given(x_vals)
def test_elementary_third_derivatives(a):
    (X,) = Jet.variables([a], 3)
    sec2 = 1 / math.cos(a) ** 2
    t = jets.tan(X)
    assert t.deriv(0, 0, 0) == pytest.approx(2 * sec2 * (sec2 + 2 * math.tan(a) ** 2), rel=1e-12)
    th = jets.tanh(X)
    s = 1 / math.cosh(a) ** 2
    assert th.deriv(0, 0) == pytest.approx(-2 * math.tanh(a) * s, rel=1e-12, abs=1e-14)
    at = jets.atan(X)
    assert at.deriv(0) == pytest.approx(1 / (1 + a * a))


@given(st.floats(0.1, 5), st.floats(-2.5, 2.5))
def test_power_and_sqrt(a, p):
    (X,) = Jet.variables([a], 2)
    f = jets.power(X, p)
    assert f.deriv(0) == pytest.approx(p * a ** (p - 1), rel=1e-12)
    assert jets.sqrt(X).deriv(0, 0) == pytest.approx(-0.25 * a ** -1.5, rel=1e-12)


def test_solve_jet_inverse_function():
    # t + t^3 = v, solved as a jet in v
    (V,) = Jet.variables([np.array(2.0)], 3)
    T = jets.solve_jet(lambda T: T + T * T * T - V, V.like(np.array(1.0)), 4.0, 4)
    assert T.value == pytest.approx(1.0)
    assert T.deriv(0) == pytest.approx(1 / 4)
    assert T.deriv(0, 0) == pytest.approx(-6 / 4**3)


def test_log_domain():
    with pytest.raises(jets.DomainError):
        jets.log(Jet.variables([np.array(-1.0)], 1)[0])
