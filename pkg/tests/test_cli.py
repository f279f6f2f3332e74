import json
import math
import subprocess
import sys

import pytest

from robust_ucb.harness.cli import EXIT_INVALID, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bounds_prints_value(capsys):
    code, out, _ = run(capsys, "bounds", "--which", "prop1_gap", "--params", json.dumps({"n": math.e, "gaps": [0, 0.5], "c": 2, "v": 1}))
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(10.5)


@pytest.mark.parametrize(
    "params",
    ['{"n": 0, "gaps": [0, 0.5], "c": 2, "v": 1}', "{not json", "[1, 2]", '{"n": 10, "c": 2}', '{"n": 2, "gaps": [0, 3.0], "c": 2, "v": 1}'],
)
def test_bounds_invalid_input(capsys, params):
    which = "prop1_free" if "3.0" in params else "prop1_gap"
    code, _, err = run(capsys, "bounds", "--which", which, "--params", params)
    assert code == EXIT_INVALID
    assert err.startswith("error:")


def test_simulate_writes_output(tmp_path, capsys):
    out_path = tmp_path / "trace.csv"
    config = {
        "instance": {"lower_bound": {"delta_gap": 0.2}},
        "policy": {"variant": "modified_robust_ucb", "estimator": {"kind": "catoni", "central_bound_v": 1.0}},
        "horizon": 200,
        "repetitions": 2,
        "master_seed": 1,
        "output": {"path": str(out_path)},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    code, out, _ = run(capsys, "simulate", "--config", str(path))
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["output"] == str(out_path) and out_path.exists()
    assert sum(summary["final_pulls_mean"]) == pytest.approx(200)
    code, _, _ = run(capsys, "simulate", "--config", str(path), "--format", "json", "--output", str(tmp_path / "t.json"))
    assert code == EXIT_OK
    assert "config" in json.loads((tmp_path / "t.json").read_text())


def test_simulate_rejects_bad_config(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"horizonn": 5}))
    code, _, err = run(capsys, "simulate", "--config", str(path))
    assert code == EXIT_INVALID and "horizonn" in err
    code, _, _ = run(capsys, "simulate", "--config", str(tmp_path / "missing.json"))
    assert code == EXIT_INVALID


def test_concentration_reports(capsys):
    dist = json.dumps({"law": "gaussian", "params": {"mean": 0, "variance": 1}})
    code, out, _ = run(
        capsys, "concentration", "--estimator", "catoni", "--dist", dist, "--n", "50", "--delta", "0.1",
        "--trials", "300", "--central-bound-v", "1.0",
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["trials"] == 300 and report["within_3se"] is True


def test_concentration_rejects_underestimated_moment(capsys):
    dist = json.dumps({"law": "pareto", "params": {"shape": 2.2}})
    code, _, err = run(
        capsys, "concentration", "--estimator", "truncated", "--dist", dist, "--n", "50", "--delta", "0.1",
        "--trials", "10", "--raw-bound-u", "1.0",
    )
    assert code == EXIT_INVALID and "raw_bound_u" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "robust_ucb", "bounds", "--which", "lower_gap", "--params", '{"delta_gap": 0.1}'],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == pytest.approx(4.0)
    bad = subprocess.run(
        [sys.executable, "-m", "robust_ucb", "bounds", "--which", "lower_gap", "--params", '{"delta_gap": 0.3}'],
        capture_output=True,
        text=True,
        check=False,
    )
    assert bad.returncode == 2
