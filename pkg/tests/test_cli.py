import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qcosym.cli import AVERAGED_HEADER, FULL_HEADER, format_rows, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


SHORT_B = {"command": "simulate", "scenario": {"case": "case-b", "t_max": 20},
           "integrator": {"method": "rk4-fixed", "dt": 0.01, "record_every": 10}}


def test_validate_standard_all_pass(tmp_path, capsys):
    code = main(["validate", "--config", str(CONFIGS / "validate_standard.json"), "--out", str(tmp_path)])
    out, err = capsys.readouterr()
    doc = json.loads(out)
    assert code == 0 and doc["passed"] is True and doc["failures"] == {}
    assert len(doc["points"]) == 64 and (doc["n"], doc["q"]) == (2, 2)
    assert "omega_closed" in err and "FAIL" not in err


def test_validate_non_closed_exits_one(capsys):
    code = main(["validate", "--config", str(CONFIGS / "validate_non_closed.json")])
    doc = json.loads(capsys.readouterr().out)
    assert code == 1 and doc["failures"] == {"omega_closed": 16}


def test_validate_seed_env(tmp_path, capsys, monkeypatch):
    cfg = write_config(tmp_path, {"command": "validate", "scenario": {"structure": "fast-slow", "points": 2}})
    monkeypatch.setenv("QCOSYM_SEED", "5")
    main(["validate", "--config", cfg])
    a = json.loads(capsys.readouterr().out)["points"][0]["point"]
    monkeypatch.setenv("QCOSYM_SEED", "6")
    main(["validate", "--config", cfg])
    b = json.loads(capsys.readouterr().out)["points"][0]["point"]
    assert a != b


def test_brackets_table(capsys):
    assert main(["brackets", "--config", str(CONFIGS / "brackets_fast_slow.json")]) == 0
    lines = capsys.readouterr().out.splitlines()
    table = {ln.split()[0]: ln.split()[1:] for ln in lines[1:]}
    assert table["{q,p}"][:2] == ["1", "1"] and table["{t,H}"][:2] == ["0", "0"]


def test_brackets_unknown_function(tmp_path, capsys):
    cfg = write_config(tmp_path, {"command": "brackets", "scenario": {"structure": "standard-example",
                                                                      "pairs": [["q1", "nope"]]}})
    assert main(["brackets", "--config", cfg]) == 2
    assert "nope" in capsys.readouterr().err


def test_simulate_case_b_csv(tmp_path, capsys):
    code = main(["simulate", "--config", write_config(tmp_path, SHORT_B), "--out", str(tmp_path / "o")])
    diag = json.loads(capsys.readouterr().out)
    assert code == 0
    header, data = read_csv(tmp_path / "o" / "trajectory.csv")
    assert tuple(header) == FULL_HEADER == ("s", "t", "tau", "q", "p", "Q", "P", "I", "J", "H")
    # 2000 steps recorded every 10th plus the initial sample
    assert data.shape == (201, 10) and diag["rows"] == 201
    assert np.allclose(data[:, 1], data[:, 0]) and np.allclose(data[:, 2], 0.05 * data[:, 0])
    raw = (tmp_path / "o" / "trajectory.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_average_case_b_monotone(tmp_path):
    doc = {"command": "simulate", "scenario": "case-b-averaged"}
    assert main(["simulate", "--config", write_config(tmp_path, doc), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "trajectory.csv")
    assert tuple(header) == AVERAGED_HEADER == ("s", "tau", "Q", "P", "I")
    assert np.all(np.diff(data[:, 3]) < 0)
    assert np.all(data[:, 2] == 1.0)
    assert np.allclose(np.diff(data[:, 3]) / np.diff(data[:, 0]), -0.5, rtol=1e-9)


def test_average_command_on_full_scenario(tmp_path):
    doc = dict(SHORT_B, command="average")
    assert main(["average", "--config", write_config(tmp_path, doc), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "trajectory.csv")
    assert tuple(header) == AVERAGED_HEADER and data.shape[0] == 201


def test_compare_outputs(tmp_path, capsys):
    doc = {"command": "compare", "scenario": {"case": "case-b", "eps": 0.2},
           "integrator": {"method": "rk4-fixed", "dt": 0.05}, "output": {"svg": True}}
    assert main(["compare", "--config", write_config(tmp_path, doc), "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["eps"] == [0.2, 0.1]
    for name in ("trajectory_full.csv", "trajectory_averaged.csv", "deviation.csv", "deviation.svg"):
        assert (tmp_path / name).exists()
    header, dev = read_csv(tmp_path / "deviation.csv")
    assert header == ["s", "dQ", "dP"] and dev.shape[0] == 101
    assert np.isclose(np.max(dev[:, 2]), report["sup_dP"][0], rtol=1e-10)


def test_svg_flag(tmp_path):
    main(["simulate", "--config", write_config(tmp_path, SHORT_B), "--out", str(tmp_path), "--svg"])
    svg = (tmp_path / "trajectory.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 4


def test_fixed_step_runs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, SHORT_B)
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


@pytest.mark.parametrize("precision", [6, 12, 17])
def test_csv_round_trip(tmp_path, precision):
    rng = np.random.default_rng(precision)
    rows = rng.normal(size=(20, 3)) * 10.0 ** rng.integers(-8, 8, size=(20, 3))
    path = tmp_path / "x.csv"
    path.write_text(format_rows(("a", "b", "c"), rows, precision))
    _, back = read_csv(path)
    assert np.allclose(back, rows, rtol=10.0 ** (1 - precision), atol=0)
    if precision == 17:
        assert np.array_equal(back, rows)


def test_exit_codes_for_bad_input(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert main(["simulate", "--config", write_config(tmp_path, {"command": "simulate",
                                                                 "scenario": {"eps": -0.1}})]) == 2
    assert main(["compare", "--config", write_config(tmp_path, SHORT_B)]) == 2
    err = capsys.readouterr().err
    assert "ConfigParseError" in err and "ConfigValidationError" in err and "declares command" in err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_runtime_error_exits_two(tmp_path, capsys):
    doc = {"command": "simulate", "scenario": {"case": "case-b", "t_max": 5, "x0": [0, 0, 1e200, 0, 1, 0]},
           "integrator": {"method": "rk4-fixed", "dt": 0.1}}
    assert main(["simulate", "--config", write_config(tmp_path, doc), "--out", str(tmp_path)]) == 2
    assert "NonFiniteState" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qcosym", "validate", "--config",
                           str(CONFIGS / "validate_fast_slow.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["passed"] is True
