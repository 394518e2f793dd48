import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracoverdet.errors import GeometryError, PreconditionError, SpecError
from fracoverdet.geometry import (
    ConvexPolygon,
    Disk,
    Ellipse,
    Interval,
    PerturbedDisk,
    certified_reach,
    deficit,
    federer_check,
    half_tube_measure,
    interior_sphere_radius,
    parallel_surface,
    parse_domain,
    square,
    steiner_fit,
    symmetric_difference_measure,
)
from fracoverdet.geometry.measures import reflect, sd_gradient

NONCONVEX = PerturbedDisk(1.0, 0.3, 2)


def _brute_distance(d, pts, m=200000):
    b = d.boundary_samples(m)[0]
    return np.array([np.min(np.linalg.norm(b - p, axis=1)) for p in pts])


# ---------------------------------------------------------------------------
# parsing


@pytest.mark.parametrize("text", [
    "disk:R=1", "disk:cx=0.3,cy=-0.2,R=1", "ellipse:a=1.2,b=1,angle=45", "interval:a=-1,b=1",
    "pdisk:R=1,eps=0.05,k=3", "square:w=2,angle=30", "rect:w=2,h=1",
    "polygon:v=-1 -0.8;1.1 -0.6;0.9 0.7;-0.3 1.0;-1.0 0.4",
])
def test_spec_round_trip(text):
    d = parse_domain(text)
    assert parse_domain(d.spec) == d


@pytest.mark.parametrize("text", [
    "blob:R=1", "disk:R=1,R=2", "disk:r=1", "ellipse:a=1", "disk:R=abc", "disk:R=-1",
    "pdisk:R=1,eps=1.5,k=2", "polygon:v=0 0;1 0;0.5 -0.1;1 1", "disk", "",
])
def test_malformed_specs(text):
    with pytest.raises(SpecError):
        parse_domain(text)


# ---------------------------------------------------------------------------
# distances


def test_disk_and_ellipse_closed_forms():
    d = Disk(0.3, -0.2, 1.0)
    assert d.sd([2.3, -0.2]) == pytest.approx(1.0)
    assert d.sd([0.3, -0.2]) == pytest.approx(-1.0)
    assert Ellipse(2.0, 1.0).sd([3.0, 0.0]) == pytest.approx(1.0, abs=1e-12)
    assert Ellipse(2.0, 1.0).sd([0.0, 0.0]) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("d", [
    Ellipse(1.2, 1.0, 0.1, 0.2, 0.4), NONCONVEX, PerturbedDisk(1.0, 0.05, 3),
    ConvexPolygon(((-1.0, -0.8), (1.1, -0.6), (0.9, 0.7), (-0.3, 1.0), (-1.0, 0.4))),
])
def test_distance_against_dense_boundary_sampling(d):
    rng = np.random.default_rng(7)
    lo, hi = d.bbox()
    pts = rng.uniform(lo - 0.5, hi + 0.5, size=(40, 2))
    ref = _brute_distance(d, pts)
    assert np.allclose(np.abs(d.signed_distance(pts)), ref, atol=2e-5)


def test_sign_matches_membership():
    rng = np.random.default_rng(3)
    for d in (NONCONVEX, square(2.0, angle=0.5), Ellipse(1.2, 1.0, angle=0.3)):
        pts = rng.uniform(-2, 2, size=(500, 2))
        sd = d.signed_distance(pts)
        assert np.array_equal(sd < 0, d.contains(pts))


@settings(max_examples=30, deadline=None)
@given(angle=st.floats(-3.1, 3.1), sx=st.floats(-2, 2), sy=st.floats(-2, 2))
def test_rigid_motion_equivariance(angle, sx, sy):
    d = Ellipse(1.3, 0.8, 0.2, -0.1, 0.3)
    e = d.transformed(angle, (sx, sy))
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    pts = np.random.default_rng(0).uniform(-2, 2, size=(50, 2))
    assert np.allclose(d.signed_distance(pts), e.signed_distance(pts @ R.T + [sx, sy]), atol=1e-10)


def test_support_points_square():
    pts = square(2.0).support_points([0.0, 1.0])
    assert np.allclose(sorted(pts[:, 0]), [-1.0, 1.0])
    assert np.allclose(pts[:, 1], 1.0)


def test_sd_gradient_is_outward_normal():
    g = sd_gradient(Disk(), np.array([[2.0, 0.0], [0.0, -1.5]]))
    assert np.allclose(g, [[1.0, 0.0], [0.0, -1.0]], atol=1e-6)


def test_interval_basics():
    d = Interval(-1.0, 2.0)
    assert d.sd(3.0) == pytest.approx(1.0)
    assert d.diam == pytest.approx(3.0)
    assert deficit(d) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# reach and parallel surfaces


def test_certified_reach():
    assert math.isinf(certified_reach(Ellipse(1.2, 1.0)))
    assert certified_reach(NONCONVEX) == pytest.approx(0.98117, abs=2e-3)


def test_parallel_surface_points_are_at_distance_t():
    surf = parallel_surface(NONCONVEX, 0.5, 128)
    assert np.allclose(NONCONVEX.signed_distance(surf.points), 0.5, atol=1e-8)
    assert surf.points.shape == (128, 2)


def test_parallel_surface_refuses_beyond_reach():
    with pytest.raises(GeometryError):
        parallel_surface(NONCONVEX, 1.3, 128)


def test_federer_inequality_below_reach():
    assert federer_check(NONCONVEX, 0.9).ok
    with pytest.raises(PreconditionError, match="not certified"):
        federer_check(NONCONVEX, 3.0)


def test_interior_sphere_radius():
    assert interior_sphere_radius(Ellipse(1.2, 1.0)) == pytest.approx(1 / 1.2)
    assert interior_sphere_radius(PerturbedDisk(1.0, 0.04, 2)) == pytest.approx(0.9013333333, rel=1e-6)
    with pytest.raises(GeometryError, match="no interior sphere"):
        interior_sphere_radius(square(2.0))


# ---------------------------------------------------------------------------
# measures


def test_half_tube_exact_cases():
    assert half_tube_measure(square(1.0), 0.1) == pytest.approx(1 - 0.8**2, rel=1e-3)
    assert half_tube_measure(Disk(), 0.2) == pytest.approx(math.pi * (1 - 0.8**2), rel=1e-3)
    assert half_tube_measure(Disk(), 5.0) == pytest.approx(math.pi, rel=1e-3)
    assert half_tube_measure(Interval(0.0, 1.0), 0.1) == pytest.approx(0.2)


def test_steiner_coefficients():
    assert steiner_fit(Disk()).phi == pytest.approx(math.pi, rel=1e-3)
    assert steiner_fit(square(1.0)).phi == pytest.approx(2.0, rel=1e-3)
    assert steiner_fit(Ellipse(1.2, 1.0)).phi == pytest.approx(Ellipse(1.2, 1.0).perimeter / 2, rel=1e-3)


def test_symmetric_difference_lens_oracle():
    lam = 0.3
    dd = 2 * lam
    lens = 2 * math.acos(dd / 2) - dd / 2 * math.sqrt(4 - dd * dd)
    assert symmetric_difference_measure(Disk(), [1, 0], lam) == pytest.approx(2 * (math.pi - lens), rel=1e-4)
    assert symmetric_difference_measure(square(2.0), [1, 0], 0.25) == pytest.approx(2.0, rel=1e-4)
    assert symmetric_difference_measure(Interval(-1.0, 1.0), [-1.0], 0.25) == pytest.approx(1.0)


def test_reflection_is_an_involution():
    x = np.random.default_rng(1).normal(size=(10, 2))
    w = np.array([0.6, 0.8])
    assert np.allclose(reflect(reflect(x, w, 0.37), w, 0.37), x)


def test_deficits():
    assert deficit(Ellipse(1.2, 1.0)) == pytest.approx(0.2, abs=1e-4)
    assert deficit(square(1.0)) == pytest.approx(math.sqrt(2) / 2 - 0.5, abs=1e-4)
    assert deficit(Disk(0.3, -0.2, 1.0)) == pytest.approx(0.0, abs=1e-6)
    assert deficit(PerturbedDisk(1.0, 0.04, 2)) == pytest.approx(0.08, abs=1e-4)
