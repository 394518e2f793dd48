import json
import math

import numpy as np
import pytest

from fracoverdet.constants import FracParams
from fracoverdet.errors import GeometryError, PreconditionError
from fracoverdet.fracsolver import Nonlinearity
from fracoverdet.geometry import ConvexPolygon, Disk, Ellipse, Interval, PerturbedDisk, square
from fracoverdet.stability import (
    StabilityReport,
    center_of_symmetry,
    convex_tube_bound,
    deficit_scaling_study,
    margin_status,
    reach_tube_bound,
    tube_checks,
    verify_theorem,
)

P = FracParams(2, 0.5)
T = 0.3


def test_center_of_symmetry():
    assert np.allclose(center_of_symmetry(Disk(0.3, -0.2, 1.0), T), [0.3, -0.2], atol=1e-3)
    # closed-set critical values put the square's centre at the far end of each flat face
    assert np.allclose(center_of_symmetry(square(2.0, cx=1.0, cy=1.0), T), [2.0, 2.0], atol=1e-3)
    assert np.allclose(center_of_symmetry(square(2.0, cx=1.0, cy=1.0, angle=math.radians(45)), T),
                       [1.0, 1.0], atol=1e-3)


def test_margin_status():
    assert margin_status(0.1, 0.01) == "pass"
    assert margin_status(-0.005, 0.01) == "inconclusive"
    assert margin_status(-0.05, 0.01) == "violation"


def test_precondition_routing():
    with pytest.raises(GeometryError, match="no interior sphere"):
        verify_theorem(square(2.0), P, T, 1 / 16, variant="T13")
    with pytest.raises(GeometryError, match="no interior sphere"):
        verify_theorem(ConvexPolygon(((0, 0), (1, 0), (0, 1))), P, 0.1, 0.02, variant="T14",
                       f=Nonlinearity(1.0))
    with pytest.raises(PreconditionError, match="needs a nonlinearity"):
        verify_theorem(Disk(), P, T, 1 / 16, variant="T14")
    with pytest.raises(PreconditionError, match="f\\(0\\)"):
        verify_theorem(Disk(), P, T, 1 / 16, variant="T16", f=Nonlinearity(-1.0))
    with pytest.raises(PreconditionError, match="torsion variant"):
        verify_theorem(Disk(), P, T, 1 / 16, variant="T13", f=Nonlinearity(1.0))
    with pytest.raises(PreconditionError, match="unknown variant"):
        verify_theorem(Disk(), P, T, 1 / 16, variant="T99")
    with pytest.raises(PreconditionError, match="reach"):
        verify_theorem(PerturbedDisk(1.0, 0.3, 2), P, 1.5, 0.1, variant="T15")


@pytest.fixture(scope="module")
def disk_report():
    return verify_theorem(Disk(), P, T, 1 / 16, m=64, variant="T13", n_dirs=4)


def test_disk_report(disk_report):
    rep = disk_report
    assert rep.status == "pass" and rep.ok
    assert rep.rho == pytest.approx(0.0, abs=1e-5)
    assert rep.margin >= 0
    assert np.allclose(rep.center, [0.0, 0.0], atol=1e-3)
    assert all(row["offset_ok"] and row["sym_diff_ok"] for row in rep.lambda_bound_checks)
    assert any("10 diam" in c for c in rep.caveats)
    assert rep.provenance["coarse"] == {"h": 1 / 16, "m": 32}


def test_report_json_round_trip(disk_report):
    text = disk_report.to_json()
    back = StabilityReport.from_dict(json.loads(text))
    assert back.to_json() == text
    assert list(json.loads(text)) == sorted(json.loads(text))


def test_square_positive_reach_report():
    rep = verify_theorem(square(2.0), P, T, 1 / 16, m=64, variant="T15", n_dirs=4)
    assert rep.variant == "T15"
    assert rep.exponent == pytest.approx(1 / 3)
    assert rep.status == "pass"
    assert rep.constants["phi_curv"] == pytest.approx(4.0, rel=1e-3)


def test_semilinear_report_carries_the_placeholder_caveat():
    rep = verify_theorem(Disk(), P, T, 1 / 16, m=64, variant="T14", f=Nonlinearity(1.0, 0.1), n_dirs=4)
    assert rep.constants["cprime"] > 0
    assert any("C_ns" in c for c in rep.caveats)
    assert rep.provenance["nonlinearity"] == "affine:a=1.0,b=0.1"


def test_scaling_study_errors():
    with pytest.raises(PreconditionError, match="at least 3"):
        deficit_scaling_study([Ellipse(1.1, 1.0), Ellipse(1.2, 1.0)], P, T, 1 / 16)
    with pytest.raises(PreconditionError, match="degenerate"):
        deficit_scaling_study([Disk(), Ellipse(1.1, 1.0), Ellipse(1.2, 1.0)], P, T, 1 / 16, m=32)


def test_scaling_study_on_ellipses():
    fam = [Ellipse(1 + dl, 1.0) for dl in (0.05, 0.1, 0.2)]
    st = deficit_scaling_study(fam, P, T, 1 / 16, m=64)
    assert st.exponent == pytest.approx(0.4)
    assert st.passed
    assert [r["rho"] for r in st.rows] == pytest.approx([0.05, 0.1, 0.2], abs=1e-4)


def test_tube_bounds():
    assert convex_tube_bound(Disk(), 0.1) == pytest.approx(0.2 * math.pi)
    assert reach_tube_bound(0.1, 1.0, 2.0) == pytest.approx(0.1 * 1.2 * 2.0)
    rows = tube_checks(Disk(), [0.01, 0.1, 0.5])
    for r in rows:
        exact = math.pi * (2 * r.gamma - r.gamma**2)
        assert r.measure == pytest.approx(exact, rel=2e-3)
        assert r.ok_convex and r.ok_reach_perimeter
    # the Steiner-normalised bound is too small for thin tubes
    assert not rows[0].ok_reach
    with pytest.raises(PreconditionError):
        tube_checks(Interval(0.0, 1.0))
