import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbern.gexpr import builtin
from hbern.hcalc import characteristic_scan, frame_from_defining, frame_from_patch, hmean_defining
from hbern.hgroup import ambient_to_frame
from hbern.jets import Jet
from hbern.surfaces import (
    NotApplicable,
    NotGraphicalStrip,
    circle_seed,
    graph_xy_new,
    graph_yt_new,
    line_seed,
    seed_surface,
    strip_defining,
    strip_new,
    strip_patch,
    strip_to_intrinsic,
    type2_xygraph,
    vertical_plane,
)

STRIPS = {
    "tan_tanh": strip_new(builtin("tan_tanh")),
    "affine": strip_new(builtin("affine", 0.5, 1.0)),
    "cot_shift": strip_new(builtin("cot_shift"), (-math.pi / 2, math.pi / 2)),
    "square_pos": strip_new(builtin("square_pos"), (0, math.inf)),
}


def test_strict_windows():
    S = STRIPS["tan_tanh"]
    assert S.is_strict and S.strict_window == (-8.0, 8.0)
    assert strip_new("2 + 0*t").strict_window is None
    with pytest.raises(NotGraphicalStrip):
        strip_new("-t", (-1, 1))
    with pytest.raises(ValueError):
        strip_new("t", (1, 1))


def test_strip_patch_oracles():
    S = strip_new(builtin("affine", 1.0, 0.0))
    assert strip_patch(S).point(2.0, 3.0) == (6.0, 2.0, 3.0)
    Y = strip_new(builtin("affine", 1.0, 0.0), branch="Y")
    assert strip_patch(Y).point(2.0, 3.0) == (2.0, -6.0, 3.0)
    with pytest.raises(ValueError):
        strip_patch(STRIPS["cot_shift"], t_window=(0.0, 2.0))


@pytest.mark.parametrize("name", sorted(STRIPS))
def test_strip_defining_frame(name):
    S = STRIPS[name]
    rng = np.random.default_rng(1)
    lo, hi = S.t_range
    t = rng.uniform(max(lo, -3), min(hi, 3), 1000)
    y = rng.uniform(-5, 5, 1000)
    G0, G1 = S.G.derivs(t, 1)[:2]
    rho = 1 + 0.5 * y * y * G1
    fr = frame_from_defining(strip_defining(S), (y * G0, y, t))
    assert np.allclose(fr.p, rho, rtol=1e-12)
    assert np.allclose(fr.q, -G0 * rho, rtol=1e-12, atol=1e-12)
    assert np.allclose(fr.omega, -y * G1, rtol=1e-12, atol=1e-12)
    assert np.allclose(fr.W**2, (1 + G0**2) * rho**2, rtol=1e-12)
    fp = frame_from_patch(strip_patch(S), y, t)
    for a, b in ((fp.p, fr.p), (fp.q, fr.q), (fp.omega, fr.omega)):
        assert np.allclose(a, b, rtol=1e-10, atol=1e-10)


def test_graph_constructors():
    S = graph_xy_new("x*y/2")
    assert S.patch.point(2.0, 3.0) == (2.0, 3.0, 3.0)
    P = graph_xy_new("0*x")
    fr = frame_from_defining(P.defining, (np.array(0.5), np.array(0.2), np.array(0.0)))
    assert float(fr.p) == pytest.approx(-0.1) and float(fr.q) == pytest.approx(0.25)
    C = graph_yt_new("y*tan(tanh(t))")
    x, y, t = C.patch.point(2.0, 0.5)
    assert x == pytest.approx(2 * math.tan(math.tanh(0.5)))


@pytest.mark.parametrize("alpha,beta", [(1.0, 0.0), (0.5, 1.0), (2.0, -1.0)])
def test_intrinsic_affine_closed_form(alpha, beta):
    ig = strip_to_intrinsic(strip_new(builtin("affine", alpha, beta)))
    rng = np.random.default_rng(3)
    u, v = rng.uniform(-3, 3, 200), rng.uniform(-3, 3, 200)
    phi = ig.evaluate(u, v, 0).value
    assert np.allclose(phi, 2 * u * (alpha * v + beta) / (2 + alpha * u * u), rtol=1e-11, atol=1e-12)


def test_intrinsic_domains():
    helicoid = strip_to_intrinsic(STRIPS["cot_shift"])
    assert not helicoid.contains(0.0, 2.0)
    assert not helicoid.contains(0.0, -1.6)
    assert helicoid.contains(0.0, 1.5)
    assert helicoid.contains(0.3, 2.0)
    with pytest.raises(NotApplicable):
        helicoid.evaluate(np.array(0.0), np.array(2.0))
    everywhere = strip_to_intrinsic(STRIPS["tan_tanh"])
    rng = np.random.default_rng(4)
    assert np.all(everywhere.contains(rng.uniform(-20, 20, 500), rng.uniform(-20, 20, 500)))


@given(st.sampled_from(sorted(STRIPS)), st.floats(-3, 3), st.floats(-1.2, 1.2))
def test_intrinsic_lands_on_strip(name, u, v):
    S = STRIPS[name]
    ig = strip_to_intrinsic(S)
    if not ig.contains(u, v):
        return
    x, y, t = ig.patch(((-1, 1), (-1, 1))).point(np.array(u), np.array(v))
    assert abs(x - y * S.G(t)) < 1e-9


@given(st.sampled_from(sorted(STRIPS)), st.tuples(st.floats(-3, 3), st.floats(0.05, 1)),
       st.tuples(st.floats(-3, 3), st.floats(0.05, 1)))
def test_phi_injective(name, p1, p2):
    S = STRIPS[name]
    lo, hi = S.t_range
    if not (lo < p1[1] < hi and lo < p2[1] < hi) or np.allclose(p1, p2):
        return
    phi = [(y, t + 0.5 * y * y * S.G(t)) for y, t in (p1, p2)]
    assert not np.allclose(phi[0], phi[1], rtol=0, atol=1e-12)


def test_type2_examples():
    a = type2_xygraph(1.0, 0.0)
    b = type2_xygraph(0.0, 1.0)
    rng = np.random.default_rng(5)
    x, y = rng.uniform(-2, 2, 50), rng.uniform(-2, 2, 50)
    assert np.allclose(a.patch.point(x, y)[2], x * y / 2)
    assert np.allclose(b.patch.point(x, y)[2], -x * y / 2)
    with pytest.raises(ValueError):
        type2_xygraph(1.0, 1.0)


@pytest.mark.parametrize("params", [
    dict(a=1.0, b=0.0),
    dict(a=0.6, b=0.8, x0=0.5, y0=-1.0, t0=2.0, h0="sin(s)"),
    dict(a=-0.8, b=0.6, x0=1.0, h0="s^3 - s"),
])
def test_type2_minimal_with_characteristic_set(params):
    S = type2_xygraph(**params)
    assert characteristic_scan(S.patch, 65)
    rng = np.random.default_rng(6)
    x, y = rng.uniform(-2, 2, 400), rng.uniform(-2, 2, 400)
    pts = S.patch.point(x, y)
    fr = frame_from_defining(S.defining, pts)
    ok = fr.W > 1e-3
    H = hmean_defining(S.defining, tuple(c[ok] for c in pts))
    assert np.max(np.abs(H)) < 1e-9


def test_vertical_plane():
    S = vertical_plane(2.0, -1.0, 3.0)
    assert characteristic_scan(S.patch, 33) == []
    rng = np.random.default_rng(8)
    u, v = rng.uniform(-2, 2, 20), rng.uniform(-2, 2, 20)
    x, y, _ = S.patch.point(u, v)
    assert np.allclose(x, 0.5 * y + 1.5)
    with pytest.raises(ValueError):
        vertical_plane(0, 0, 1)


def test_seed_surface_oracles():
    F = seed_surface(circle_seed(1.0, h0="-s"))
    assert np.allclose(F.point(0.0, 0.0), (1, 0, 0))
    L = seed_surface(line_seed(0.0, 0.0, 1.0, 0.0))
    s, r = np.array([0.3, -0.7]), np.array([1.1, 0.4])
    x, y, t = L.point(s, r)
    assert np.allclose(x, s) and np.allclose(y, -r) and np.allclose(t, x * y / 2)


@given(st.floats(0.3, 3), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), st.floats(-2, 2))
def test_rules_are_horizontal(R, x0, y0, s, r):
    F = seed_surface(circle_seed(R, x0, y0, h0="sin(s) - s^2"))
    S, Rj = Jet.variables([np.array(s), np.array(r)], 1)
    x, y, t = F.fn(S, Rj)
    along_r = (x.deriv(1), y.deriv(1), t.deriv(1))
    k = ambient_to_frame((x.value, y.value, t.value), along_r)[2]
    assert abs(k) < 1e-10
