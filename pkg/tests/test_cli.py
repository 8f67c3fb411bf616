import json
import os

import numpy as np
import pytest
from conftest import CONFIGS, load_config

from cylgraph import cli, io


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--model", "cylinder2:C=1,H=1", "--t", "0.2", "--k", "3")
    assert code == 0
    params, vals, _ = io.spectrum_from_csv(out)
    assert params["method"] == "closed_form"
    np.testing.assert_allclose(vals, [27.4155678, 66.8939856, 66.8939856], rtol=1e-8)


def test_spectrum_command(capsys, tmp_path):
    vec = tmp_path / "vec.txt"
    code, out, _ = run(
        capsys, "spectrum", "--model", "interval:L=1", "--eps", "0.01", "--rho", "0.03",
        "--t", "0.1", "--k", "3", "--eigenvectors", str(vec),
    )
    assert code == 0
    params, vals, res = io.spectrum_from_csv(out)
    assert params["method"] == "dense" and len(vals) == 3
    assert np.all(np.diff(vals) > 0) and np.all(res < 1e-8)
    rows = [r for r in vec.read_text().splitlines() if not r.startswith("#")]
    assert len(rows) == 81 and len(rows[0].split()) == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--model", "interval:L=1", "--eps", "0.05", "--rho", "0.04", "--t", "0.1"],
        ["spectrum", "--model", "sphere:R=1", "--eps", "0.01", "--rho", "0.02", "--t", "0.1"],
        ["oracle", "--model", "interval:L=1", "--t", "0.6"],
    ],
)
def test_configuration_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "configuration error" in err


def test_bad_sweep_config_exits_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({**load_config("interval_sweep.json"), "rho_A": 0.9}))
    code, _, err = run(capsys, "sweep", "--config", str(path), "--out", str(tmp_path / "o"))
    assert code == 2 and "3*rho < t" in err
    path.write_text("{not json")
    assert run(capsys, "sweep", "--config", str(path))[0] == 2


def test_solver_error_exits_3(capsys):
    code, _, err = run(
        capsys, "spectrum", "--model", "cylinder2:C=1,H=1", "--eps", "0.05", "--rho", "0.07",
        "--t", "0.25", "--k", "5", "--solver", "lanczos", "--max-iter", "4",
    )
    assert code == 3 and "solver error" in err


def test_sweep_passes(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--config", os.path.join(CONFIGS, "interval_sweep.json"), "--out", str(tmp_path))
    assert code == 0 and out.startswith("verdict: pass")
    for name in ("report.csv", "report.json", "verdict.txt", "timings.json"):
        assert (tmp_path / name).exists()


def test_sweep_fails_with_exit_1(capsys, tmp_path):
    path = tmp_path / "k5.json"
    path.write_text(json.dumps({**load_config("interval_sweep.json"), "k": 5}))
    code, out, _ = run(capsys, "sweep", "--config", str(path), "--out", str(tmp_path / "o"))
    assert code == 1 and out.startswith("verdict: fail")


def test_failed_solves_in_sweep_exit_3(capsys, tmp_path):
    path = tmp_path / "cap.json"
    path.write_text(json.dumps({**load_config("interval_sweep.json"), "solver": "lanczos", "max_iter": 2}))
    code, out, _ = run(capsys, "sweep", "--config", str(path), "--out", str(tmp_path / "o"))
    assert code == 3


def test_audit_command(capsys, tmp_path):
    code, out, _ = run(capsys, "audit", "--config", os.path.join(CONFIGS, "audit_interval.json"), "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "lemmas.json").read_text())
    assert out.startswith(f"{len(doc['checks'])}/{len(doc['checks'])} checks passed")


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-m", "cylgraph", "oracle", "--model", "interval:L=1", "--t", "0", "--k", "1"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert float(out.stdout.strip().splitlines()[-1].split(",")[1]) == pytest.approx(np.pi**2)
