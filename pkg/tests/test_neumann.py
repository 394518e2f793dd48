import math

import numpy as np
import pytest

from fracoverdet.acceptance import ns_psi_reference
from fracoverdet.constants import FracParams
from fracoverdet.errors import PreconditionError
from fracoverdet.fracsolver import Field, build_grid, exact_ball_solution, solve_torsion
from fracoverdet.geometry import Disk, Ellipse, Interval
from fracoverdet.neumann import (
    lipschitz_seminorm,
    neumann_directional_derivative,
    neumann_trace,
    nonlocal_neumann,
)

P1 = FracParams(1, 0.5)
P2 = FracParams(2, 0.5)


@pytest.fixture(scope="module")
def disk_solution():
    d = Disk()
    return d, solve_torsion(d, build_grid(d, 1 / 16), P2)


def test_quadrature_reference_closed_form():
    # -1/pi int (1 - y^2)^{1/2} / (2 - y)^2 dy = 1 - 2/sqrt(3)
    assert ns_psi_reference(2.0, P1) == pytest.approx(1 - 2 / math.sqrt(3), rel=1e-10)


def test_lattice_sum_of_exact_psi_matches_quadrature():
    d = Interval(-1.0, 1.0)
    g = build_grid(d, 2.0**-8)
    psi = Field.from_function(g, lambda x: exact_ball_solution([0.0], 1.0, P1, x))
    for x in (1.5, 2.0, -3.0):
        assert nonlocal_neumann(psi, d, P1, x) == pytest.approx(ns_psi_reference(x, P1), rel=2e-3)


def test_neumann_is_negative_and_decays(disk_solution):
    d, u = disk_solution
    vals = nonlocal_neumann(u, d, P2, np.array([[1.2, 0.0], [2.0, 0.0], [4.0, 0.0]]))
    assert np.all(vals < 0)
    assert np.all(np.diff(np.abs(vals)) < 0)


def test_directional_derivative_matches_finite_difference(disk_solution):
    d, u = disk_solution
    x = np.array([1.1, 0.4])
    w = np.array([0.6, 0.8])
    eps = 1e-5
    fd = (nonlocal_neumann(u, d, P2, x + eps * w) - nonlocal_neumann(u, d, P2, x - eps * w)) / (2 * eps)
    assert neumann_directional_derivative(u, d, P2, x, w) == pytest.approx(fd, rel=1e-6)


def test_interior_points_rejected(disk_solution):
    d, u = disk_solution
    with pytest.raises(PreconditionError):
        nonlocal_neumann(u, d, P2, [0.5, 0.0])


def test_trace_requires_offset_of_four_cells(disk_solution):
    d, u = disk_solution
    with pytest.raises(PreconditionError, match="4h"):
        neumann_trace(u, d, P2, 0.2)


def test_disk_trace_nearly_constant(disk_solution):
    d, u = disk_solution
    tr = neumann_trace(u, d, P2, 0.3, m=64)
    assert tr.values.shape == (64,)
    assert np.ptp(tr.values) < 0.05 * abs(tr.mean)


def test_ellipse_trace_has_larger_seminorm(disk_solution):
    d, u = disk_solution
    e = Ellipse(1.2, 1.0)
    v = solve_torsion(e, build_grid(e, 1 / 16), P2)
    assert neumann_trace(v, e, P2, 0.3, m=64).seminorm > 2 * neumann_trace(u, d, P2, 0.3, m=64).seminorm


def test_lipschitz_seminorm_is_exact():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(30, 2))
    vals = rng.normal(size=30)
    sem, (i, j) = lipschitz_seminorm(pts, vals)
    brute = max(
        abs(vals[a] - vals[b]) / np.linalg.norm(pts[a] - pts[b])
        for a in range(30) for b in range(a + 1, 30)
    )
    assert sem == pytest.approx(brute, rel=1e-14)
    assert abs(vals[i] - vals[j]) / np.linalg.norm(pts[i] - pts[j]) == pytest.approx(sem)
    # a linear function has seminorm |gradient|
    lin = pts @ np.array([3.0, 4.0])
    assert lipschitz_seminorm(pts, lin)[0] <= 5.0 + 1e-12
