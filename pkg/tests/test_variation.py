
import numpy as np
import pytest

from hbern.bumps import ball_bump, box_bump
from hbern.gexpr import builtin
from hbern.quadrature import QuadratureSpec
from hbern.surfaces import DefiningFn, ParamPatch, strip_new, vertical_plane
from hbern import variation as V

SPEC = QuadratureSpec(rtol=1e-9, atol=1e-12)
STRIP = strip_new(builtin("tan_tanh"))
SUPPORT = ((-1.0, 1.0), (-1.0, 1.0))


def _bump(U, Vv):
    return box_bump(U, Vv, (0.0, 0.0), (1.0, 1.0))


def test_deform_at_zero_is_identity():
    X = V.random_deformation(np.random.default_rng(0), SUPPORT)
    u = np.linspace(-1, 1, 7)
    moved = V.deform(STRIP.patch, X, 0.0).point(u, u)
    assert np.allclose(moved, STRIP.patch.point(u, u))


def test_deformation_is_left_invariant_translation():
    # a constant horizontal field with k = 0 moves the point along x
    # by lam and t by -lam * y / 2
    X = V.param_field(a=lambda U, Vv: U * 0 + 1.0, support=SUPPORT)
    u, v = np.array([0.3]), np.array([0.4])
    x, y, t = STRIP.patch.point(u, v)
    x2, y2, t2 = V.deform(STRIP.patch, X, 0.25).point(u, v)
    assert np.allclose((x2, y2, t2), (x + 0.25, y, t - 0.125 * y))


def test_normal_bump_formula_matches_finite_differences():
    X = V.normal_field(_bump, SUPPORT, ambient=False)
    formula = V.second_variation_normal_formula(STRIP, _bump, SUPPORT, SPEC, ambient=False)
    fd = V.second_variation_numeric(STRIP.patch, X, spec=SPEC, rule="trapezoid")
    assert fd.value == pytest.approx(formula.value, rel=1e-6)
    first = V.first_variation_numeric(STRIP.patch, X, spec=SPEC, rule="trapezoid")
    assert abs(first.value) < 1e-7


def test_x1_bump_formula_matches_finite_differences():
    c = [float(w) for w in STRIP.patch.point(0.0, 0.0)]

    def a(x, y, t):
        return ball_bump((x, y, t), c, 1.0)

    X = V.ambient_field(a=a, support=SUPPORT)
    formula = V.second_variation_x1_formula(STRIP, a, SUPPORT, SPEC)
    fd = V.second_variation_numeric(STRIP.patch, X, spec=SPEC, rule="trapezoid")
    assert fd.value == pytest.approx(formula.value, rel=1e-6)


@pytest.mark.parametrize("mode", ["normal", "x1"])
def test_strip_reduction_matches_general_formula(mode):
    u = _bump
    red = V.strip_second_variation(STRIP, u, SUPPORT, mode, SPEC)
    if mode == "normal":
        gen = V.second_variation_normal_formula(STRIP, u, SUPPORT, SPEC, ambient=False)
        assert red.value == pytest.approx(gen.value, rel=1e-8)
    else:
        # u X1 equals (u pbar) nu + tangential part; compare with FD instead
        X = V.param_field(a=u, support=SUPPORT)
        fd = V.second_variation_numeric(STRIP.patch, X, spec=SPEC, rule="trapezoid")
        assert red.value == pytest.approx(fd.value, rel=1e-6)


def test_first_variation_on_a_cylinder():
    R = 1.0

    def fn(U, Vv):
        from hbern import jets
        return R * jets.cos(U), R * jets.sin(U), Vv

    patch = ParamPatch(fn, ((-1, 1), (-1, 1)))
    defining = DefiningFn(lambda x, y, t: (x * x + y * y - 1) / 2)
    X = V.normal_field(_bump, SUPPORT, ambient=False)
    formula = V.first_variation_formula(patch, X, SPEC, defining)
    fd = V.first_variation_numeric(patch, X, spec=SPEC, rule="trapezoid")
    assert abs(formula.value) > 0.1
    assert fd.value == pytest.approx(formula.value, rel=1e-7)


def test_vertical_plane_identity():
    plane = vertical_plane(1.0, 0.0, 0.0)
    res = V.vertical_plane_stability(plane, np.random.default_rng(11), samples=2)
    for s in res:
        assert s.v2.value >= 0
        assert s.rel_diff < 1e-4


def test_invalid_mode():
    with pytest.raises(ValueError):
        V.strip_second_variation(STRIP, _bump, SUPPORT, "tangent")
