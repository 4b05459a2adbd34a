import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbern.hgroup import (
    EuclideanPlane,
    FrameVector,
    GroupPoint,
    NoCharacteristicPoint,
    ambient_to_frame,
    compose,
    dilate,
    frame_ambient,
    homogeneous_dimension,
    identity,
    inverse,
    plane_characteristic_point,
    rotate_z,
    translate_plane,
)
from hbern.surfaces import plane_surface
from hbern.hcalc import frame_from_defining

coord = st.floats(-10, 10, allow_nan=False)
points = st.builds(GroupPoint, coord, coord, coord)


def close(g, h, tol=1e-12):
    return all(abs(a - b) <= tol * (1 + abs(b)) for a, b in zip(g, h))


def test_compose_oracle():
    assert tuple(compose((1, 0, 0), (0, 1, 0))) == (1, 1, 0.5)


@given(points)
def test_identity_and_inverse(g):
    assert close(compose(identity(), g), g)
    assert close(compose(g, inverse(g)), (0, 0, 0))


@given(points, points, points)
def test_associative(a, b, c):
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    assert close(left, right, 1e-13)


def test_dilation_oracle_and_rejection():
    assert tuple(dilate(2, (1, 1, 1))) == (2, 2, 4)
    assert close(dilate(1, (3, -2, 5)), (3, -2, 5))
    with pytest.raises(ValueError):
        dilate(0, (1, 1, 1))


@given(st.floats(0.1, 5), st.floats(0.1, 5), points)
def test_dilation_semigroup(lam, mu, g):
    assert close(dilate(lam, dilate(mu, g)), dilate(lam * mu, g), 1e-12)


@given(st.floats(0.1, 5), points, points)
def test_dilation_is_automorphism(lam, g, h):
    assert close(dilate(lam, compose(g, h)), compose(dilate(lam, g), dilate(lam, h)), 1e-11)


def test_rotation():
    assert close(rotate_z(math.pi / 2, (1, 0, 5)), (0, 1, 5))
    assert close(rotate_z(0.0, (1, 2, 3)), (1, 2, 3))


@given(st.floats(-7, 7), points)
def test_rotation_inverse(theta, g):
    assert close(rotate_z(-theta, rotate_z(theta, g)), g, 1e-12)


def test_frame_ambient_oracles():
    assert frame_ambient((0, 0, 0), (1.0, 2.0, 3.0)) == (1.0, 2.0, 3.0)
    assert frame_ambient((0, 2, 0), FrameVector(1, 0, 0)) == (1, 0, -1)
    assert frame_ambient((2, 0, 0), FrameVector(0, 1, 0)) == (0, 1, 1)


@given(points, st.tuples(coord, coord, coord), st.tuples(coord, coord, coord), coord)
def test_frame_ambient_linear_and_invertible(g, v, w, c):
    lhs = frame_ambient(g, tuple(a + c * b for a, b in zip(v, w)))
    fv, fw = frame_ambient(g, v), frame_ambient(g, w)
    assert np.allclose(lhs, [a + c * b for a, b in zip(fv, fw)], rtol=1e-12, atol=1e-9)
    assert np.allclose(ambient_to_frame(g, fv), v, rtol=1e-12, atol=1e-10)


def test_homogeneous_dimension():
    assert homogeneous_dimension(1) == 4
    assert homogeneous_dimension(3) == 8


def test_translate_plane_oracles():
    P = EuclideanPlane(0, 0, 1, 0)
    assert translate_plane((1, 1, 0), P) == EuclideanPlane(0.5, -0.5, 1, 0)
    assert translate_plane((0, 0, 0), P) == P
    V = translate_plane((3, -1, 2), EuclideanPlane(1, 2, 0, 1))
    assert V.c == 0


planes = st.builds(EuclideanPlane, coord, coord, st.floats(0.5, 3), coord)


@given(planes, points, coord, coord)
def test_translate_plane_membership(P, g0, x, y):
    t = (P.gamma - P.a * x - P.b * y) / P.c
    assert P.contains((x, y, t), 1e-12)
    moved = compose(g0, (x, y, t))
    Q = translate_plane(g0, P)
    resid = Q.a * moved.x + Q.b * moved.y + Q.c * moved.t - Q.gamma
    assert abs(resid) < 1e-10 * (1 + abs(Q.gamma) + abs(moved.t))


def test_characteristic_point_oracles():
    assert tuple(plane_characteristic_point(EuclideanPlane(0, 0, 1, 0))) == (0, 0, 0)
    assert close(plane_characteristic_point(EuclideanPlane(1, 1, 2, 4)), (-1, 1, 2))
    with pytest.raises(NoCharacteristicPoint):
        plane_characteristic_point(EuclideanPlane(1, 0, 0, 0))


@given(planes)
def test_characteristic_point_is_horizontal(P):
    g = plane_characteristic_point(P)
    fr = frame_from_defining(plane_surface(P).defining, tuple(g))
    assert float(fr.W) < 1e-12


def test_degenerate_plane_rejected():
    with pytest.raises(ValueError):
        EuclideanPlane(0, 0, 0, 1)


def test_hn_compose():
    g = GroupPoint(np.array([1.0, 2.0]), np.array([0.0, 1.0]), 0.0)
    h = GroupPoint(np.array([0.0, 1.0]), np.array([1.0, 0.0]), 1.0)
    out = compose(g, h)
    assert out.t == pytest.approx(1 + 0.5 * ((1 * 1 + 2 * 0) - (0 * 0 + 1 * 1)))
    assert out.n == 2
