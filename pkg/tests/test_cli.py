import csv
import io
import json

import numpy as np
import pytest

from holokit.cli import parse_point, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_distance_report(capsys):
    code, out, _ = call(capsys, "distance", "--domain", "ball(h,2)", "--from", "0,0", "--to", "0.3,0.4", "--no-timestamp")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["lower"] == pytest.approx(0.549306, abs=1e-6)
    assert rep["result"]["upper"] == pytest.approx(0.549306, abs=1e-6)
    for key in ("tolerance", "budget", "degree", "seed"):
        assert key in rep
    assert "timestamp" not in rep


def test_annulus_scan(capsys):
    code, out, _ = call(capsys, "scan", "--domain", "annulus(2)", "--map", "1/z", "--no-timestamp")
    pts = sorted(p["point"][0][0] for p in json.loads(out)["result"]["fixed_points"])
    assert code == 0 and np.allclose(pts, [-1, 1])


def test_fixpoint(capsys):
    code, out, _ = call(capsys, "fixpoint", "--domain", "disc", "--map", "0.5*z0+0.2")
    assert code == 0
    re, im = json.loads(out)["result"]["point"][0]
    assert abs(re - 0.4) < 1e-8 and im == 0


def test_hypothesis_violation_exit_code(capsys):
    code, _, err = call(capsys, "fixpoint", "--domain", "disc", "--map", "2*z0")
    assert code == 2
    assert json.loads(err)["error"] == "NotCompactlyContainedError"


def test_internal_error_exit_code(capsys):
    code, _, err = call(capsys, "distance", "--domain", "disc", "--from", "0", "--to", "1.5")
    assert code == 1
    assert json.loads(err)["error"] == "OutsideDomainError"
    code, _, err = call(capsys, "distance", "--domain", "disk", "--from", "0", "--to", "0.5")
    assert code == 1 and json.loads(err)["error"] == "ParseError"


def test_deterministic_output(capsys):
    argv = ["geodesic", "--domain", "polydisc(1,1)", "--from", "0,0", "--to", "0.5,0.25", "--no-timestamp"]
    _, first, _ = call(capsys, *argv)
    _, second, _ = call(capsys, *argv)
    assert first == second


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = call(capsys, "metric", "--domain", "disc", "--point", "0.5", "--vector", "1", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["result"]["lower"] == pytest.approx(4 / 3)


def test_other_commands(capsys):
    code, out, _ = call(capsys, "retract", "--domain", "ball(h,2)", "--map", "x, -y", "--point", "0.3,0.4", "--no-timestamp")
    assert code == 0 and np.allclose(json.loads(out)["result"]["point"], [[0.3, 0], [0, 0]], atol=1e-7)
    code, out, _ = call(capsys, "linearize", "--map", "z0, z0^2", "--point", "0,0")
    assert code == 0 and json.loads(out)["result"]["conjugacy_defect"] < 1e-9
    code, out, _ = call(capsys, "extreme", "--domain", "ball(sup,2)", "--point", "1,0")
    assert code == 0 and json.loads(out)["result"]["is_extreme"] is False


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_lambda_sweep(capsys):
    code, out, _ = call(capsys, "sweep", "--kind", "lambda", "--map=-z", "--point", "0.4", "--grid", "0:0.9:10")
    rows = _rows(out)
    assert code == 0 and len(rows) == 10
    for row in rows:
        lam = float(row["lambda"])
        assert float(row["z0_re"]) == pytest.approx(0.4 * (1 - lam) / (1 + lam), abs=1e-8)
        assert row["error"] == ""


def test_radius_sweep(capsys):
    _, out, _ = call(capsys, "sweep", "--kind", "radius", "--grid", "0.1:0.9:9")
    for row in _rows(out):
        assert float(row["lower"]) == pytest.approx(np.arctanh(float(row["radius"])), abs=1e-12)


def test_sweep_records_errors(capsys):
    code, out, _ = call(capsys, "sweep", "--kind", "radius", "--grid", "0.5:1.5:3")
    rows = _rows(out)
    assert code == 0 and len(rows) == 3
    assert rows[0]["error"] == "" and rows[2]["error"].startswith("OutsideDomainError")


def test_n_sweep(capsys):
    _, out, _ = call(capsys, "sweep", "--kind", "n", "--map", "z1, z0", "--point", "0,0", "--grid", "8:32:3")
    assert [r["n"] for r in _rows(out)] == ["8", "20", "32"]


def test_parse_point():
    assert np.allclose(parse_point("0.3, 0.4*i"), [0.3, 0.4j])
    assert np.allclose(parse_point("-1/2"), [-0.5])
