import json
import xml.etree.ElementTree as ET

import numpy as np

from fracoverdet import io
from fracoverdet.constants import FracParams
from fracoverdet.fracsolver import build_grid, solve_torsion
from fracoverdet.geometry import Disk, Interval
from fracoverdet.neumann import neumann_trace

P = FracParams(2, 0.5)


def _disk():
    d = Disk()
    return d, solve_torsion(d, build_grid(d, 1 / 8), P)


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 2.5e-17, np.float64(7.0)):
        assert float(io.fmt(x)) == float(x)


def test_dumps_is_canonical():
    text = io.dumps({"b": np.float64(0.1), "a": [np.int64(1), np.bool_(True)], "c": np.arange(2.0)})
    assert text.endswith("\n")
    assert json.loads(text) == {"a": [1, True], "b": 0.1, "c": [0.0, 1.0]}
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')


def test_field_csv(tmp_path):
    d, u = _disk()
    io.write_field_csv(tmp_path / "u.csv", u)
    lines = (tmp_path / "u.csv").read_text().splitlines()
    assert lines[0] == "x,y,u"
    assert len(lines) == u.grid.node_count + 1
    back = np.loadtxt(tmp_path / "u.csv", delimiter=",", skiprows=1)
    assert np.array_equal(back[:, 2], u.values)


def test_trace_csv(tmp_path):
    d = Disk()
    u = solve_torsion(d, build_grid(d, 1 / 16), P)
    tr = neumann_trace(u, d, P, 0.3, m=32)
    io.write_trace_csv(tmp_path / "t.csv", tr)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "arclength,x,y,Ns"
    assert len(lines) == 33


def test_svgs_are_well_formed():
    d, u = _disk()
    tr = neumann_trace(solve_torsion(d, build_grid(d, 1 / 16), P), d, P, 0.3, m=32)
    i = Interval(-1.0, 1.0)
    v = solve_torsion(i, build_grid(i, 1 / 32), FracParams(1, 0.5))
    for svg in (io.field_svg(u), io.trace_svg(d, tr), io.field_svg(v)):
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        assert len(list(root)) >= 2
