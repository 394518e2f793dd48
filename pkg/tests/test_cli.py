import json

import pytest

from fracoverdet.cli import EXIT_OK, EXIT_PRECONDITION, EXIT_USAGE, RunConfig, read_config, run
from fracoverdet.errors import SpecError


def test_solve_writes_csv_and_svg(tmp_path, capsys):
    out = tmp_path / "u.csv"
    assert run(["solve", "--domain", "disk:R=1", "--h", "0.125", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("x,y,u\n")
    assert (tmp_path / "u.svg").read_text().startswith("<svg")
    assert "nodes" in capsys.readouterr().out


def test_solve_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["solve", "--domain", "ellipse:a=1.2,b=1", "--h", "0.125", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_semilinear_solve(tmp_path):
    out = tmp_path / "u.csv"
    args = ["solve", "--domain", "disk:R=1", "--h", "0.125", "--f", "affine:a=1,b=0.1", "--out", str(out)]
    assert run(args) == EXIT_OK


def test_neumann_json(tmp_path):
    out = tmp_path / "trace.csv"
    args = ["neumann", "--domain", "disk:R=1", "--h", "0.0625", "--t", "0.3", "--m", "32", "--out", str(out),
            "--svg", str(tmp_path / "t.svg")]
    assert run(args) == EXIT_OK
    doc = json.loads((tmp_path / "trace.json").read_text())
    assert doc["m"] == 32 and doc["sampled_seminorm"] >= 0
    assert (tmp_path / "t.svg").exists()


def test_movingplane_json(tmp_path):
    out = tmp_path / "mp.json"
    args = ["movingplane", "--domain", "square:w=2", "--t", "0.3", "--omega", "1,0", "--omega", "1,1",
            "--out", str(out)]
    assert run(args) == EXIT_OK
    rows = json.loads(out.read_text())
    assert [round(r["lam_star"], 3) for r in rows] == [1.0, 0.0]


def test_steiner_json(tmp_path):
    out = tmp_path / "st.json"
    assert run(["steiner", "--domain", "square:w=1", "--gammas", "0.05,0.2", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["phi"] == pytest.approx(2.0, rel=1e-2)
    assert len(doc["tube"]) == 2


def test_verify_routes_polygons_to_precondition_failure(capsys):
    code = run(["verify", "--domain", "square:w=2", "--variant", "T13", "--h", "0.0625"])
    assert code == EXIT_PRECONDITION
    assert "no interior sphere condition" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["solve", "--domain", "blob:R=1"],
    ["solve", "--domain", "disk:R=1", "--s", "1.5"],
    ["solve", "--domain", "disk:R=1", "--h", "-1"],
    ["solve"],
    ["frobnicate"],
    ["verify", "--domain", "disk:R=1", "--variant", "T99"],
    ["movingplane", "--domain", "disk:R=1", "--omega", "0,0"],
    ["movingplane", "--domain", "disk:R=1", "--omega", "1,0,0"],
    ["corpus", "--only", "12"],
])
def test_malformed_input_exits_64(argv):
    assert run(argv) == EXIT_USAGE


def test_config_sets_defaults_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# solve settings\ndomain = disk:R=1\nh = 0.25\n")
    out = tmp_path / "u.csv"
    assert run(["solve", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert len(out.read_text().splitlines()) == 45 + 1
    assert run(["solve", "--config", str(cfg), "--h", "0.125", "--out", str(out)]) == EXIT_OK
    assert len(out.read_text().splitlines()) == 193 + 1
    cfg.write_text("domain = disk:R=1\nh = 0.5\n")
    assert run(["solve", "--config", str(cfg), "--out", str(out)]) == EXIT_PRECONDITION


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert run(["solve", "--config", str(cfg), "--domain", "disk:R=1"]) == EXIT_USAGE
    cfg.write_text("just words\n")
    with pytest.raises(SpecError):
        read_config(str(cfg))
    assert run(["solve", "--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE


def test_run_config_validation():
    RunConfig("solve", "disk:R=1").validate()
    for kw in ({"s": 0.0}, {"t": 0.0}, {"m": 8}, {"variant": "T12"}, {"h": float("inf")}):
        with pytest.raises(SpecError):
            RunConfig("solve", "disk:R=1", **kw).validate()
