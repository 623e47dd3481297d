import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from dsdirac import cli
from dsdirac.checks import Check


def run(tmp_path, *args):
    code = cli.main([*args, "--out", str(tmp_path)])
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    return code, manifest


def read_csv(path):
    rows = list(csv.reader(path.open()))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


class TestGrid:
    def test_list(self):
        assert cli.parse_grid("1, 2.5,-3") == [1.0, 2.5, -3.0]

    def test_linear_inclusive(self):
        assert cli.parse_grid("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_geometric(self):
        np.testing.assert_allclose(cli.parse_grid("geom:1e-2:1e-4:3"), [1e-2, 1e-3, 1e-4])

    def test_empty(self):
        assert cli.parse_grid("") == []

    @pytest.mark.parametrize("text", ["a,b", "0:1", "0:1:0", "geom:0:1:3", "geom:-1:1:3"])
    def test_invalid(self, text):
        with pytest.raises(cli.ConfigError):
            cli.parse_grid(text)


class TestSolveMode:
    def test_closed(self, tmp_path):
        code, man = run(tmp_path, "solve-mode", "--slicing", "closed", "--m", "1.0",
                        "--lambda", "1.5", "--t0", "-30", "--t1", "30")
        assert code == 0 and man["outputs"] == ["trajectory.csv"] and man["status"] == "ok"
        header, data = read_csv(tmp_path / "trajectory.csv")
        assert header == ["t", "re_u1", "im_u1", "re_u2", "im_u2"]
        assert np.all(np.diff(data[:, 0]) > 0)

    def test_flat_conformal(self, tmp_path):
        code, _ = run(tmp_path, "solve-mode", "--slicing", "flat", "--m", "1.0", "--k", "1,0,0",
                      "--s", "+1", "--chart", "conformal", "--t0", "-100", "--t1", "-0.1")
        assert code == 0
        _, data = read_csv(tmp_path / "trajectory.csv")
        assert data[0, 0] == -100 and data[-1, 0] == -0.1

    def test_json_format(self, tmp_path):
        code, man = run(tmp_path, "solve-mode", "--t0", "0", "--t1", "1", "--format", "json")
        assert code == 0 and man["outputs"] == ["trajectory.json"]
        data = json.loads((tmp_path / "trajectory.json").read_text())
        assert data["columns"][0] == "t" and len(data["rows"][0]) == 5

    def test_empty_interval(self, tmp_path, capsys):
        code, man = run(tmp_path, "solve-mode", "--t0", "0", "--t1", "0")
        assert code == 2 and man["status"] == "config error"
        assert "t0 and t1 must differ" in capsys.readouterr().err

    def test_bad_lambda(self, tmp_path):
        code, man = run(tmp_path, "solve-mode", "--lambda", "2", "--t0", "0", "--t1", "1")
        assert code == 2 and "lambda" in man["error"]

    def test_chart_mismatch(self, tmp_path):
        code, _ = run(tmp_path, "solve-mode", "--chart", "conformal", "--t0", "0", "--t1", "1")
        assert code == 2


class TestSignature:
    def test_grid(self, tmp_path):
        code, man = run(tmp_path, "signature", "--m", "0.5,1,2", "--lambda", "1.5,-1.5,2.5,-2.5",
                        "--threads", "1")
        assert code == 0
        recs = json.loads((tmp_path / "signature.json").read_text())
        assert len(recs) == 12
        assert [(r["m"], r["lambda"]) for r in recs][:2] == [(0.5, 1.5), (0.5, -1.5)]
        assert all(r["status"] == "ok" and r["max_deviation"] < 1e-6 for r in recs)
        assert len(man["tasks"]) == 12

    def test_single_mode_record(self, tmp_path):
        code, _ = run(tmp_path, "signature", "--m", "1", "--lambda", "1.5")
        (rec,) = json.loads((tmp_path / "signature.json").read_text())
        sp = np.array([[complex(*x) for x in row] for row in rec["S_plus"]])
        assert code == 0 and np.abs(sp - np.diag([1, -1])).max() < 1e-8
        assert rec["source"] == "numeric" and rec["closed_form"]["source"] == "closed-form"
        proj = np.array([[complex(*x) for x in row] for row in rec["projector"]])
        assert np.abs(proj @ proj - proj).max() < 1e-10
        ev = rec["eigenvalues"]
        assert ev[0] == pytest.approx(-ev[1], abs=1e-10)

    def test_empty_lambda(self, tmp_path):
        code, man = run(tmp_path, "signature", "--lambda", "")
        assert code == 2 and man["outputs"] == []

    def test_extraction_failure(self, tmp_path):
        code, man = run(tmp_path, "signature", "--m", "1", "--lambda", "5.5", "--t-extract", "2")
        assert code == 3 and man["status"] == "numerical failure"
        (rec,) = json.loads((tmp_path / "signature.json").read_text())
        assert rec["status"] == "failed" and "NotConvergedError" in rec["error"]

    def test_threads_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["signature", "--m", "0.5,2", "--lambda", "1.5,-3.5"]
        assert cli.main([*args, "--threads", "1", "--out", str(a)]) == 0
        assert cli.main([*args, "--threads", "3", "--out", str(b)]) == 0
        assert (a / "signature.json").read_bytes() == (b / "signature.json").read_bytes()


class TestTwoPoint:
    def test_table(self, tmp_path):
        code, man = run(tmp_path, "twopoint", "--m", "1", "--radius", "1", "--z", "0:0.999:200")
        assert code == 0 and sorted(man["outputs"]) == ["exponents.json", "twopoint.csv"]
        header, data = read_csv(tmp_path / "twopoint.csv")
        assert header == ["Z", "re_f", "im_f", "re_h", "im_h"] and len(data) == 200
        assert data[0, 0] == 0 and data[0, 3] == 0 and data[0, 4] == 0
        exp = json.loads((tmp_path / "exponents.json").read_text())
        assert -1.55 <= exp["p_f"] <= -1.45 and -1.05 <= exp["p_h"] <= -0.95
        assert set(exp["fit_residuals"]) == {"f", "h"}

    def test_out_of_domain(self, tmp_path):
        code, _ = run(tmp_path, "twopoint", "--z", "0:1.2:10")
        assert code == 2

    def test_bad_fit_grid_is_config_error(self, tmp_path):
        code, _ = run(tmp_path, "twopoint", "--z", "0,0.5", "--z-fit", "0.5,0.6")
        assert code == 2

    def test_poor_fit_is_numerical(self, tmp_path):
        code, man = run(tmp_path, "twopoint", "--z", "0,0.5",
                        "--z-fit", ",".join(str(1 - x) for x in np.geomspace(0.1, 1e-3, 12)))
        assert code == 3 and "FitQualityError" in man["error"]


class TestBoundaryAndSmear:
    def test_boundary(self, tmp_path):
        code, man = run(tmp_path, "boundary", "--tau=-1e3,-1e4", "--t-grid=-1,0,1")
        assert code == 0
        data = json.loads((tmp_path / "boundary.json").read_text())
        assert len(data["extractions"]) == 2
        assert data["mass_identity"]["max_residual"] < 1e-7

    @pytest.mark.parametrize("args", [["--tau", "1"], ["--m-prime", "1"], ["--lambda", "0"]])
    def test_boundary_validation(self, tmp_path, args):
        code, _ = run(tmp_path, "boundary", *args)
        assert code == 2

    def test_smear(self, tmp_path):
        code, man = run(tmp_path, "smear", "--t", "10,20")
        assert code == 0 and man["outputs"] == ["smear.csv", "smear_fit.json"]
        fit = json.loads((tmp_path / "smear_fit.json").read_text())
        assert fit["quadrature_error"] < 1e-8

    @pytest.mark.parametrize("args", [["--interval", "1,1"], ["--t", "10"]])
    def test_smear_validation(self, tmp_path, args):
        code, _ = run(tmp_path, "smear", *args)
        assert code == 2


class TestVerify:
    def test_special_suite(self, tmp_path):
        code, man = run(tmp_path, "verify", "--suite", "special")
        names = {c["name"] for c in man["checks"]}
        assert code == 0
        assert {"connection_vs_series", "log_gamma_reflection_formula"} <= names
        assert "suite:special" in man["timing"]

    def test_failure_exit_code(self, tmp_path, monkeypatch):
        bad = Check("always_red", "special", 1.0, None, 0.5)
        monkeypatch.setattr(cli, "run_suites", lambda names: ([bad], {"special": 0.0}))
        code, man = run(tmp_path, "verify", "--suite", "special")
        assert code == 1 and man["status"] == "verification failed"
        assert man["checks"][0]["passed"] is False


class TestConfig:
    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"m": 2.0, "lambda": 2.5, "t0": 0, "t1": 1, "tol-rel": 1e-8}))
        code, man = run(tmp_path, "solve-mode", "--config", str(cfg), "--m", "3")
        eff = man["config"]
        assert code == 0
        assert (eff["m"], eff["lambda"], eff["tol_rel"]) == (3.0, 2.5, 1e-8)

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mass": 2.0}))
        code = cli.main(["solve-mode", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 2

    def test_missing_file(self, tmp_path):
        code = cli.main(["verify", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert code == 2

    def test_tolerance_range(self, tmp_path):
        code, _ = run(tmp_path, "solve-mode", "--t0", "0", "--t1", "1", "--tol-rel", "1")
        assert code == 2


def test_entry_point_runs(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dsdirac.cli", "twopoint", "--z", "0,0.5",
                           "--out", "o"], cwd=tmp_path, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config"]["out"] == "o"
    assert all((tmp_path / "o" / name).exists() for name in man["outputs"])


def test_same_run_twice_is_byte_identical(tmp_path):
    args = ["twopoint", "--z", "0:0.99:20"]
    for d in ("a", "b"):
        assert cli.main([*args, "--out", str(tmp_path / d)]) == 0
    for name in ("twopoint.csv", "exponents.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
