import json
import subprocess
import sys

import numpy as np
import pytest

from trotterlab.cli import evaluate_formula, main
from trotterlab.errors import ConfigError


@pytest.fixture
def osc_config(tmp_path):
    p = tmp_path / "osc.json"
    p.write_text(json.dumps({"model": {"kind": "oscillator", "dim": 60}, "state": {"kind": "basis", "k": 1},
                             "n_list": [10, 20, 40, 80, 160, 320]}))
    return p


def test_sweep_and_fit(tmp_path, osc_config, capsys):
    out = tmp_path / "c.csv"
    assert main(["sweep", "--config", str(osc_config), "--out", str(out), "--jobs", "2"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,error" and len(lines) == 7
    assert main(["fit", "--curve", str(out)]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert -1.2 < fit["slope"] < -0.8
    assert main(["fit", "--config", str(osc_config), "--sliding", "--window", "10", "320"]) == 0
    assert "crossover_n" in json.loads(capsys.readouterr().out)


def test_sweep_to_stdout_json(osc_config, capsys):
    assert main(["sweep", "--config", str(osc_config), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["points"]) == 6


def test_truncation_check_cli(osc_config, capsys):
    assert main(["truncation-check", "--config", str(osc_config), "--truncations", "40", "60"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["name"] == "truncation_check"


def test_bounds_cli(capsys):
    assert main(["bounds", "oscillator_bound", "t=1", "n=1000", "normNpsi=1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["valid"] and abs(rep["value"] - 6e-3) < 1e-12
    assert main(["bounds", "dirac_constants", "B0=1", "eps=1"]) == 0
    assert json.loads(capsys.readouterr().out)["inputs"]["omega"] == 2
    assert main(["bounds", "oscillator_bound", "t=1"]) == 1
    assert main(["bounds", "perturbative_constants", "a=1", "b=0", "a_prime=0", "b_prime=0"]) == 1


def test_evaluate_formula_errors():
    with pytest.raises(ConfigError):
        evaluate_formula("nope", {})
    with pytest.raises(ConfigError):
        evaluate_formula("many_body_rate", {"eps": 0.1, "x": 1})
    assert evaluate_formula("favard_exponent", {"alpha": 0.75, "beta": 0.25, "gamma": 1,
                                                "mode": "self_adjoint"}).value == 0.25


def test_enorm_cli(tmp_path, capsys):
    A = np.array([[0, 1], [1, 0]], dtype=complex)
    np.save(tmp_path / "A.npy", A)
    np.save(tmp_path / "G.npy", np.diag([0.0, 1.0]))
    assert main(["enorm", "--A", str(tmp_path / "A.npy"), "--G", str(tmp_path / "G.npy"), "--E", "0.5",
                 "--bruteforce", "--samples", "2000"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["value"] - rep["inputs"]["bruteforce"]) <= 1e-6 * rep["value"]
    np.save(tmp_path / "bad.npy", np.array([[1.0, 2.0], [0.0, 1.0]]))
    np.save(tmp_path / "neg.npy", np.diag([-1.0, 1.0]))
    assert main(["enorm", "--A", str(tmp_path / "A.npy"), "--G", str(tmp_path / "neg.npy"), "--E", "1"]) == 1


def test_enorm_cli_bracket_failure(tmp_path):
    np.save(tmp_path / "A.npy", np.eye(2))
    np.save(tmp_path / "G.npy", np.diag([1e-12, 1.0]))
    # optimal multiplier 1/1e-12 lies far above the default bracket end 1e8
    code = main(["enorm", "--A", str(tmp_path / "A.npy"), "--G", str(tmp_path / "G.npy"), "--E", "1e-13"])
    assert code == 2


def test_probe_cli(capsys):
    assert main(["probe", "--M", "100", "--s", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["name"] == "favard_probe" and 0.5 < rep["value"] <= 1.1
    assert main(["probe", "--M", "100"]) == 1


def test_config_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": {"kind": "oscillator", "dim": 10}, "state": {"kind": "basis", "k": 0}, "x": 1}')
    assert main(["sweep", "--config", str(bad)]) == 1
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == 1
    assert main(["sweep"]) == 1
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--bogus"])
    assert info.value.code == 1


def test_numerical_failure_exit_2(tmp_path):
    p = tmp_path / "nan.npz"
    np.savez(p, H_A=np.array([[np.nan, 0], [0, 1.0]]), H_B=np.eye(2))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"kind": "custom", "path": "nan.npz"}, "state": {"kind": "basis", "k": 0},
                               "n_list": [2]}))
    assert main(["sweep", "--config", str(cfg)]) == 2


def test_module_entry_point(osc_config):
    out = subprocess.run([sys.executable, "-m", "trotterlab", "sweep", "--config", str(osc_config)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("n,error\n")
