import json

import pytest

from flatnorm import io as fio
from flatnorm.cli import main
from flatnorm.geom import PLCurrent, PLRegion


def test_triangulate_flatnorm_deform(tmp_path, capsys):
    (tmp_path / "sq.pslg").write_text("4 4\nv 0 0 0\nv 1 1 0\nv 2 1 1\nv 3 0 1\n"
                                      "s 0 0 1\ns 1 1 2\ns 2 2 3\ns 3 3 0\n")
    assert main(["triangulate", str(tmp_path / "sq.pslg"), "--max-edge", "0.4", "--out", str(tmp_path / "m.cx"),
                 "--chain", str(tmp_path / "t.csv"), "--report", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["min_angle"] >= 30 - 1e-9
    capsys.readouterr()
    assert main(["flatnorm", "--mesh", str(tmp_path / "m.cx"), "--chain", str(tmp_path / "t.csv"),
                 "--lambda", "1/10", "--out", str(tmp_path / "f.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["integral"] and out["mass_x"] == 0
    fio.save_plc(PLCurrent.from_polyline([("1/10", "1/7"), ("5/7", "3/11")]), tmp_path / "a.plc")
    fio.save_plr(PLRegion(((((0, 0), (1, 0), (1, 1), (0, 1)), 1),)), tmp_path / "b.plr")
    rc = main(["deform", "--mesh", str(tmp_path / "m.cx"), "--curves", str(tmp_path / "a.plc"),
               "--regions", str(tmp_path / "b.plr"), "--out", str(tmp_path / "ch"), "--cert", str(tmp_path / "c.json"),
               "--forms", "3"])
    assert rc == 0
    cert = json.loads((tmp_path / "c.json").read_text())
    assert cert["ok"] and cert["curves"][0]["stokes_residual"] == 0
    assert (tmp_path / "ch" / "curve0.csv").exists() and (tmp_path / "ch" / "region0.csv").exists()


def test_strip_and_approx(tmp_path, capsys):
    assert main(["strip", "--n", "2", "4", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "strip.json").read_text())
    assert all(abs(r["ratio"] - 2 / 3 ** 0.5) < 1e-9 for r in rows)
    (tmp_path / "arc.json").write_text(json.dumps({"type": "arc", "center": [0, 0], "radius": 1,
                                                   "start": 0, "end": 1.5707963267948966}))
    assert main(["approx", str(tmp_path / "arc.json"), "--rho", "0.01", "--out", str(tmp_path / "p.plc")]) == 0
    assert len(fio.load_plc(tmp_path / "p.plc").segments) == 8


def test_spanning_sweep_ngon(tmp_path, capsys):
    assert main(["spanning", "--out", str(tmp_path), "--lambdas", "1/10,1,100"]) == 0
    assert json.loads((tmp_path / "spanning.json").read_text())["verdict"]["threshold"] == 4.0
    assert main(["ngon", "--n", "8", "--out", str(tmp_path)]) == 0
    assert main(["sweep", "--mesh", str(tmp_path / "ngon8.cx"), "--chain", str(tmp_path / "ngon8.csv"),
                 "--lambdas", "1,2,4", "--out", str(tmp_path / "sw")]) == 0
    assert (tmp_path / "sw" / "sweep.csv").read_text().startswith("lambda,value")


def test_converge_cli(tmp_path, capsys):
    assert main(["converge", "--input", "segment", "--deltas", "0.2,0.1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "segment.csv").exists()


def test_errors_reported(tmp_path, capsys):
    (tmp_path / "bad.pslg").write_text("garbage\n")
    assert main(["triangulate", str(tmp_path / "bad.pslg"), "--out", str(tmp_path / "x.cx")]) == 2
    assert "error" in capsys.readouterr().err
