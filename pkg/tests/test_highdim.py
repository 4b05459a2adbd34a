import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbern.highdim import (
    CylinderSurface,
    GradientFloor,
    cylinder_defining,
    cylinder_frame,
    cylinder_hmean,
    cylinder_perimeter_check,
    heisenberg_hmean,
    measure_densities,
    negative_example_nu,
    plane_cylinder,
    sphere_cylinder,
    sphere_patch,
    sphere_patch_area,
)


def _sphere_points(n, R, m, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2 * n, m))
    z *= R / np.linalg.norm(z, axis=0)
    return list(z) + [rng.uniform(-3, 3, m)]


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("R", [0.5, 2.0])
def test_sphere_cylinder_curvature(n, R):
    C = sphere_cylinder(n, R)
    pts = _sphere_points(n, R, 200)
    assert np.allclose(cylinder_hmean(C, pts), (2 * n - 1) / R, rtol=1e-10)
    H = heisenberg_hmean(cylinder_defining(C), n, pts)
    assert np.allclose(H, (2 * n - 1) / R, rtol=1e-10)


def test_frame_and_floor():
    C = sphere_cylinder(2, 1.0)
    fr = cylinder_frame(C, _sphere_points(2, 1.0, 10))
    assert np.allclose(fr["W"], 1) and np.all(fr["T"] == 0)
    bowl = CylinderSurface(1, lambda x, y: x * x + y * y)
    with pytest.raises(GradientFloor):
        cylinder_hmean(bowl, [np.zeros(1), np.zeros(1)])
    with pytest.raises(ValueError):
        sphere_cylinder(0, 1.0)


@given(st.integers(1, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_planes_are_minimal(n, a, b):
    normal = np.zeros(2 * n)
    normal[0], normal[-1] = 1.0, 0.5
    C = plane_cylinder(n, normal, offset=a)
    pts = [np.full(3, b)] * (2 * n)
    assert np.max(np.abs(cylinder_hmean(C, pts))) < 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_hausdorff_density_matches_closed_form(n):
    R = 1.5
    box = [(0.4, 1.1)] * (2 * n - 2) + [(0.2, 1.5), (-0.5, 0.7)]
    U = [np.array([0.5 * (lo + hi)]) for lo, hi in box]
    W, N, w = (float(a[0]) for a in measure_densities(sphere_patch(n, R), n, U))
    density = R ** (2 * n - 1) * math.prod(math.sin(float(U[k][0])) ** (2 * n - 2 - k)
                                           for k in range(2 * n - 1))
    assert N == pytest.approx(density, rel=1e-12)
    assert W == pytest.approx(N, rel=1e-12) and abs(w) < 1e-14


@pytest.mark.parametrize("n", [1, 2])
def test_perimeter_equals_hausdorff(n):
    R = 1.5
    box = [(0.3, 1.2)] * (2 * n - 2) + [(0.2, 1.5), (-0.5, 0.7)]
    chk = cylinder_perimeter_check(sphere_patch(n, R), n, box)
    assert chk.rel_diff < 1e-9
    assert chk.hausdorff == pytest.approx(sphere_patch_area(n, R, box), rel=1e-9)


def test_negative_example_divergence():
    f = "log(cos(y1)/cos(x1))"
    rng = np.random.default_rng(2)
    pts = [rng.uniform(-1.2, 1.2, 50) for _ in range(4)]
    nu, div = negative_example_nu(f, 2, pts)
    assert np.allclose(np.linalg.norm(nu, axis=0), 1)
    assert np.max(np.abs(div)) < 1e-7
    _, div = negative_example_nu("x1^2 + y1", 2, pts)
    assert np.max(np.abs(div)) > 0.1
