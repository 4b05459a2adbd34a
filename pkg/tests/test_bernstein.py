import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbern.bernstein import (
    NotAGraph,
    ReductionError,
    classify_seed,
    coplanarity_residual,
    extract_strip,
    line_seed_characteristic,
    reference_trace,
    rule_line,
    seed_trace,
    translate_seed,
)
from hbern.gexpr import as_function
from hbern.hcalc import frame_from_patch
from hbern.hgroup import compose
from hbern.surfaces import (
    circle_seed,
    graph_xy_new,
    graph_yt_new,
    line_seed,
    seed_surface,
)


def test_trace_matches_reference_integrator():
    S = graph_xy_new("sin(x) + y^2/3")
    seed = seed_trace(S, (1.0, 1.0), (-0.8, 0.8), tol=1e-12)
    s = seed.samples["s"]
    ref = reference_trace(S, (1.0, 1.0), s)
    assert np.max(np.abs(seed.samples["gamma"] - ref)) < 1e-9
    mid = 0.5 * (s[1:] + s[:-1])
    ref_mid = reference_trace(S, (1.0, 1.0), mid)
    assert np.max(np.abs(np.array(seed.point(mid)) - ref_mid)) < 1e-6
    speed = np.hypot(*seed.samples["dgamma"])
    assert np.allclose(speed, 1)


def test_trace_height_lies_on_the_graph():
    f = as_function("sin(x) + y^2/3", ("x", "y"))
    seed = seed_trace(graph_xy_new("sin(x) + y^2/3"), (1.0, 1.0), (-0.5, 0.5))
    g = seed.samples["gamma"]
    assert np.allclose(seed.samples["h0"], f(g[0], g[1]), atol=1e-12)


@pytest.mark.parametrize("seed", [
    line_seed(0.3, -0.2, 0.0, 1.0, "s^2"),
    circle_seed(1.5, h0="sin(s)"),
])
def test_coplanarity_for_entire_graph_seeds(seed):
    s = np.linspace(-1, 1, 51)
    assert np.max(np.abs(coplanarity_residual(seed, s))) < 1e-14


@given(st.floats(-1, 1), st.floats(-2, 2))
def test_rules_are_horizontal_lines_on_the_surface(s, r):
    seed = circle_seed(1.2, 0.4, -0.3, "s^3")
    L = rule_line(seed, s)
    assert abs(L.frame[2]) < 1e-12
    F = seed_surface(seed, (-2, 2))
    assert np.allclose(L.point(r), F.point(np.array(s), np.array(r)), atol=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_translate_seed_commutes_with_left_translation(x0, y0, t0, s, r):
    seed = circle_seed(0.8, h0="s - s^2")
    g0 = (x0, y0, t0)
    moved = seed_surface(translate_seed(g0, seed)).point(np.array(s), np.array(r))
    expect = compose(g0, tuple(float(c) for c in seed_surface(seed).point(np.array(s), np.array(r))))
    assert np.allclose(moved, (expect.x, expect.y, expect.t), atol=1e-11)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 2 * math.pi), st.sampled_from(["0*s", "s^2", "sin(s)"]))
def test_line_seed_characteristic_point(x0, y0, ang, h0):
    seed = line_seed(x0, y0, math.cos(ang), math.sin(ang), h0)
    r_star = line_seed_characteristic(seed, 0.0)
    fr = frame_from_patch(seed_surface(seed, (-50, 50)), np.array(0.0), np.array(r_star))
    assert float(fr.W) < 1e-9 * (1 + float(fr.N))


def test_classification_branches():
    assert classify_seed(line_seed(1.0, 2.0, 0.0, 1.0)).kind == "line"
    c = classify_seed(circle_seed(1.5))
    assert c.kind == "circle" and c.params["radius"] == pytest.approx(1.5)
    off = classify_seed(circle_seed(1.0, x0=2.0, interval=(0.5, 2.0)))
    assert off.params["branch"] == "general"
    assert np.allclose(off.params["center"], (2.0, 0.0)) and off.params["radius"] == pytest.approx(1.0)
    with pytest.raises(NotAGraph):
        classify_seed(circle_seed(1.0, x0=2.0))
    fallback = classify_seed(circle_seed(1.0, y0=1.0))
    assert fallback.kind == "circle" and not fallback.entire_graph_condition


def test_extraction_recovers_tan_tanh():
    S = graph_yt_new("y*tan(tanh(t))")
    E = extract_strip(S, ((0.5, 1.5), (-0.5, 0.5)))
    t = np.linspace(*E.interval, 501)
    assert np.max(np.abs(E.G(t) - np.tan(np.tanh(t)))) < 1e-6
    assert [st["stage"] for st in E.trace] == [
        "minimality", "psi_t", "trace", "classify", "translate", "injectivity", "window", "invert"]


def test_extraction_rejections():
    with pytest.raises(ReductionError) as e:
        extract_strip(graph_yt_new("2*y + 1"))
    assert e.value.stage == "psi_t"
    with pytest.raises(ReductionError) as e:
        extract_strip(graph_yt_new("y^2 + t"))
    assert e.value.stage == "minimality"
    with pytest.raises(ReductionError) as e:
        extract_strip(graph_yt_new("2*(y - t)/y"), ((1, 2), (-1, 0)))
    assert e.value.stage == "characteristic"
    assert e.value.details["W"] < 1e-9
