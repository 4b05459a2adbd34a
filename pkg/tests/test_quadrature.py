import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbern.bumps import box_bump
from hbern.quadrature import (
    QuadratureError,
    QuadratureSpec,
    compact_trapezoid_2d,
    gauss_legendre_box,
    integrate_1d,
    integrate_2d,
)


@pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
def test_rational_oracle(a):
    # substitute y = tan(s)/sqrt(a/2) to map the real line onto (-pi/2, pi/2)
    c = math.sqrt(a / 2)

    def f(s):
        y = np.tan(s) / c
        return (1 / np.cos(s) ** 2 / c) / (2 + a * y * y) ** 2

    res = integrate_1d(f, -math.pi / 2, math.pi / 2)
    exact = math.sqrt(2) * math.pi / (8 * math.sqrt(a))
    assert res.value == pytest.approx(exact, rel=1e-12)
    assert res.error < 1e-10 * exact


def test_oscillatory_2d():
    res = integrate_2d(lambda u, v: np.cos(5 * u) * np.exp(v), (0, 1), (0, 2))
    exact = math.sin(5) / 5 * (math.e**2 - 1)
    assert res.value == pytest.approx(exact, rel=1e-12)


def test_vector_valued():
    res = integrate_2d(lambda u, v: np.stack([u * v, u + v]), (0, 1), (0, 1))
    assert np.allclose(res.value, [0.25, 1.0], rtol=1e-13)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(-2, 0), st.floats(0.1, 2))
def test_polynomials_exact(coef, a, w):
    p = np.polynomial.Polynomial(coef)
    res = integrate_1d(p, a, a + w)
    exact = p.integ()(a + w) - p.integ()(a)
    assert abs(res.value - exact) <= 1e-12 * (1 + abs(exact))


def test_error_estimate_is_honest():
    f = lambda u, v: np.sqrt(u + v + 1e-3)
    coarse = integrate_2d(f, (0, 1), (0, 1), QuadratureSpec(rtol=1e-7))
    fine = integrate_2d(f, (0, 1), (0, 1), QuadratureSpec(rtol=1e-12))
    assert abs(coarse.value - fine.value) <= coarse.error


def test_strict_failure():
    with pytest.raises(QuadratureError):
        integrate_2d(lambda u, v: 1 / np.sqrt(np.abs(u - 0.3) + 1e-300), (0, 1), (0, 1),
                     QuadratureSpec(rtol=1e-14, max_depth=4))


def test_bad_limits():
    with pytest.raises(ValueError):
        integrate_1d(np.sin, 0, np.inf)
    with pytest.raises(ValueError):
        integrate_2d(lambda u, v: u, (1, 0), (0, 1))
    with pytest.raises(ValueError):
        QuadratureSpec(rtol=0)


def test_trapezoid_on_bumps_matches_adaptive():
    f = lambda u, v: box_bump(u, v, (0.1, -0.2), (0.7, 0.5)) * (1 + u * v)
    trap = compact_trapezoid_2d(f, (-1, 1), (-1, 1), QuadratureSpec(rtol=1e-11))
    ref = integrate_2d(f, (-1, 1), (-1, 1), QuadratureSpec(rtol=1e-12))
    assert trap.value == pytest.approx(ref.value, rel=1e-10)


def test_gauss_legendre_box():
    val = gauss_legendre_box(lambda x, y, z: x * x * y * np.cos(z), [(0, 1), (0, 2), (0, 1)], 8)
    assert val == pytest.approx((1 / 3) * 2 * math.sin(1), rel=1e-14)
    vec = gauss_legendre_box(lambda x, y: np.stack([x, y * y]), [(0, 1), (0, 3)], 5, chunk=7)
    assert np.allclose(vec, [1.5, 9.0], rtol=1e-14)
