import csv
import io
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from gaussprod.cli import run
from gaussprod.linalg import matrix_to_json


@pytest.fixture
def files(tmp_path):
    def write(name, S):
        p = tmp_path / name
        p.write_text(json.dumps(matrix_to_json(np.asarray(S, dtype=float))))
        return str(p)

    return {
        "I2": write("I2.json", np.eye(2)),
        "rho": write("rho.json", [[1.0, 0.3, 0.5], [0.3, 1.0, 0.2], [0.5, 0.2, 1.0]]),
        "cov": write("cov.json", [[4.0, 0.6], [0.6, 1.0]]),
        "dir": tmp_path,
    }


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_moment_identity(capsys, files):
    code, out, err = invoke(capsys, "moment", "--sigma", files["I2"], "--alpha", "2,2")
    assert code == 0 and err == ""
    assert json.loads(out)["value"] == 1.0


def test_moment_negative_alpha_and_methods(capsys, files):
    code, out, _ = invoke(capsys, "moment", "--sigma", files["cov"], "--alpha", "-0.5,1", "--method", "quad")
    est = json.loads(out)
    assert code == 0 and est["method"] == "quadrature"
    code, out, _ = invoke(capsys, "moment", "--sigma", files["cov"], "--alpha=-0.5,1", "--method", "mc",
                          "--samples", "20000", "--seed", "4")
    mc = json.loads(out)
    assert code == 0 and mc["samples"] == 20000 and mc["seed"] == 4
    assert abs(mc["value"] - est["value"]) <= 4 * mc["err"] + est["err"]


def test_moment_output_is_reproducible(capsys, files):
    argv = ("moment", "--sigma", files["rho"], "--alpha", "0.5,1.5,2.5", "--samples", "5000", "--seed", "1")
    assert invoke(capsys, *argv)[1] == invoke(capsys, *argv)[1]


def test_bound_one_negative_two_positive(capsys, files):
    code, out, _ = invoke(capsys, "bound", "--kind", "prop1_4", "--sigma", files["rho"], "--alpha", "-0.5,1,1")
    res = json.loads(out)
    assert code == 0 and res["pass"] is True
    assert res["extras"]["constant"] == pytest.approx(math.pi / 2)


def test_bound_domain_error_exits_2(capsys, files):
    code, out, err = invoke(capsys, "bound", "--kind", "prop1_4", "--sigma", files["rho"], "--alpha", "0.5,1,1")
    assert code == 2 and out == "" and "prop1_4" in err


def test_usage_errors_exit_2(capsys, files):
    code, out, err = invoke(capsys, "moment", "--bogus")
    assert code == 2 and out == "" and "usage" in err
    assert invoke(capsys, "frobnicate")[0] == 2
    assert invoke(capsys, "moment", "--sigma", files["I2"], "--alpha", "a,b")[0] == 2
    assert invoke(capsys, "moment", "--sigma", str(files["dir"] / "missing.json"), "--alpha", "1,1")[0] == 2
    assert invoke(capsys, "bound", "--kind", "nope", "--sigma", files["I2"], "--alpha", "1,1")[0] == 2


def test_capability_error_exits_3(capsys, files):
    code, out, err = invoke(capsys, "moment", "--sigma", files["rho"], "--alpha", "0.5,1.5,2.5", "--method", "isserlis")
    assert code == 3 and out == "" and "Isserlis" in err


def test_sweep_json_and_csv(capsys, files):
    code, out, err = invoke(capsys, "sweep", "--trials", "2", "--seed", "3")
    data = json.loads(out)
    assert code == 0 and data["summary"]["total"] == 22 and data["summary"]["failed"] == 0
    assert "thm1_1" in err
    path = files["dir"] / "s.csv"
    code, out, _ = invoke(capsys, "sweep", "--trials", "2", "--seed", "3", "--kinds", "gpi_n2,wei_a3",
                          "--format", "csv", "--out", str(path))
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert code == 0 and out == "" and len(rows) == 5


def test_sweep_with_config_file(capsys, files):
    cfg = files["dir"] / "cfg.json"
    cfg.write_text(json.dumps({"kinds": ["even_gpi_1_6"], "trials": 3, "master_seed": 8}))
    code, out, _ = invoke(capsys, "sweep", "--config", str(cfg))
    assert code == 0 and json.loads(out)["config"]["kinds"] == ["even_gpi_1_6"]
    cfg.write_text(json.dumps({"kinds": ["even_gpi_1_6"], "trials": -3}))
    assert invoke(capsys, "sweep", "--config", str(cfg))[0] == 2


def test_verify_runs_self_test(capsys):
    code, out, err = invoke(capsys, "verify", "--trials", "1", "--kinds", "thm1_1")
    assert code == 0
    assert "11/11 corrupted bounds rejected" in err
    assert json.loads(out)["summary"]["passed"] == 1


def test_hunt(capsys):
    code, out, err = invoke(capsys, "hunt", "--n", "3", "--trials", "5", "--seed", "2", "--samples", "4000")
    assert code == 0 and "0 persisted" in err
    assert json.loads(out)["config"]["trials"] == 5


@pytest.mark.skipif(shutil.which("gaussprod") is None, reason="console script not installed")
def test_console_script(files):
    proc = subprocess.run(["gaussprod", "moment", "--sigma", files["I2"], "--alpha", "2,2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["value"] == 1.0
    proc = subprocess.run(["gaussprod", "moment"], capture_output=True, text=True, check=False)
    assert proc.returncode == 2 and proc.stdout == ""
