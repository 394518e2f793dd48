import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracoverdet.constants import FracParams
from fracoverdet.errors import ConvergenceError, PreconditionError, SpecError
from fracoverdet.fracsolver import (
    Field,
    Nonlinearity,
    assemble_operator,
    boundary_exponent,
    build_grid,
    energy,
    exact_ball_solution,
    fft_operator,
    lattice_zeta,
    parse_nonlinearity,
    solve_semilinear,
    solve_torsion,
    verify_lower_bound,
)
from fracoverdet.geometry import Disk, Ellipse, Interval, square

P1 = FracParams(1, 0.5)
P2 = FracParams(2, 0.5)


def _centre_value(d, p, h):
    g = build_grid(d, h)
    u = solve_torsion(d, g, p)
    i = int(np.argmin(np.linalg.norm(g.nodes - d.center, axis=1)))
    return u.values[i]


def test_lattice_zeta_closed_form_1d():
    # 2 zeta(2) at s = 1/2
    assert lattice_zeta(1, 0.5) == pytest.approx(math.pi**2 / 3, rel=1e-13)


def test_1d_centre_value_converges_first_order():
    errs = [abs(_centre_value(Interval(-1.0, 1.0), P1, h) - 1.0) for h in (2**-5, 2**-6, 2**-7)]
    assert errs[2] < 1e-2
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 0.8)


def test_2d_disk_centre_value():
    assert _centre_value(Disk(), P2, 1 / 16) == pytest.approx(2 / math.pi, rel=2e-2)


def test_operator_is_an_m_matrix():
    d = Ellipse(1.2, 1.0)
    A = assemble_operator(d, build_grid(d, 0.2), P2).matrix
    off = A - np.diag(np.diag(A))
    assert np.all(off <= 0)
    assert np.all(np.diag(A) + off.sum(axis=1) > 0)
    assert np.allclose(A, A.T)


def test_dense_and_fft_agree():
    d = square(2.0, angle=0.3)
    g = build_grid(d, 0.125)
    a = solve_torsion(d, g, P2, method="dense").values
    b = solve_torsion(d, g, P2, method="fft").values
    assert np.max(np.abs(a - b)) < 1e-9
    x = np.random.default_rng(0).normal(size=g.node_count)
    assert np.allclose(assemble_operator(d, g, P2).matvec(x), fft_operator(d, g, P2).matvec(x))


def test_torsion_positive_and_below_ball_comparison():
    # comparison with the circumscribed disk of radius 1.2
    d = Ellipse(1.2, 1.0)
    g = build_grid(d, 0.1)
    u = solve_torsion(d, g, P2)
    assert u.info["positive"]
    outer = exact_ball_solution((0.0, 0.0), 1.2, P2, g.nodes)
    assert np.all(u.values <= outer * 1.02)


def test_boundary_exponent_is_s():
    d = Interval(-1.0, 1.0)
    for s in (0.3, 0.7):
        p = FracParams(1, s)
        u = solve_torsion(d, build_grid(d, 2**-9), p)
        assert boundary_exponent(u, 0.1) == pytest.approx(s, abs=0.08)


def test_weak_lower_bound_holds_on_the_disk():
    d = Disk()
    u = solve_torsion(d, build_grid(d, 1 / 16), P2)
    rep = verify_lower_bound(u, d, P2, "weak")
    assert rep.ok and rep.min_slack >= -rep.band


def test_semilinear_converges_and_dominates_torsion():
    d = Disk()
    g = build_grid(d, 1 / 8)
    f = Nonlinearity(1.0, 0.1)
    u = solve_semilinear(d, g, P2, f)
    w = solve_torsion(d, g, P2)
    assert u.info["positive"]
    assert np.all(u.values >= w.values)
    hist = u.info["history"]
    assert hist[-1] <= 1e-10
    # a fixed point of the affine map: A u = 1 + 0.1 u
    from fracoverdet.fracsolver import get_operator
    op = get_operator(d, g, P2)
    assert np.allclose(op.matvec(u.values), f(u.values), atol=1e-8)


def test_semilinear_reports_divergence():
    d = Disk()
    g = build_grid(d, 1 / 4, strict=False)
    with pytest.raises(ConvergenceError) as exc:
        solve_semilinear(d, g, P2, Nonlinearity(1.0, 50.0), theta=1.0, kmax=200)
    assert len(exc.value.history) > 0


def test_energy_decreases_to_the_torsion_minimum():
    d = Disk()
    g = build_grid(d, 1 / 8)
    u = solve_torsion(d, g, P2)
    e0 = energy(u, P2)
    bumped = Field(g, u.values * 1.05)
    assert energy(bumped, P2) > e0


def test_grid_and_field_preconditions():
    with pytest.raises(PreconditionError):
        build_grid(Disk(), 0.5)
    with pytest.raises(PreconditionError):
        build_grid(Disk(), -0.1)
    g = build_grid(Disk(), 0.5, strict=False)
    with pytest.raises(PreconditionError):
        Field(g, np.ones(g.node_count + 1))
    with pytest.raises(PreconditionError):
        Field(g, np.full(g.node_count, np.nan))


def test_parse_nonlinearity():
    f = parse_nonlinearity("affine:a=1,b=0.1")
    assert (f.a, f.b) == (1.0, 0.1)
    assert parse_nonlinearity(f.spec) == f
    for bad in ("cubic:a=1", "affine:b=1", "affine:a=1,a=2", "affine:a=x"):
        with pytest.raises(SpecError):
            parse_nonlinearity(bad)


@settings(max_examples=15, deadline=None)
@given(s=st.floats(0.1, 0.9))
def test_maximum_principle_on_coarse_grid(s):
    d = Disk()
    A = assemble_operator(d, build_grid(d, 0.25), FracParams(2, s)).matrix
    assert np.min(np.linalg.inv(A)) >= -1e-12
