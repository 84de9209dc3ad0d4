import copy
import json
import subprocess
import sys

import numpy as np
import pytest

from ptnet import ConfigError, load_ptmp1
from ptnet.cli import dump_config, main, parse_config

BASE = {
    "system": {"d": 2, "hamiltonian": {"pauli": {"x": 1.0}}, "lambdas": [1, -1]},
    "bath": {"kind": "continuum", "amplitude": 0.05, "exponent": 1, "cutoff": 1.0,
             "cutoff_form": "exponential", "beta": 1.0},
    "grid": {"dt": 0.1, "n_steps": 6, "n_mem": 6},
    "truncation": {"rel_cutoff": 1e-10},
    "task": {"kind": "propagate"},
}


def config(**task):
    cfg = copy.deepcopy(BASE)
    cfg["task"].update(task)
    return cfg


def write(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_minimal_config_parses():
    cfg = parse_config(json.dumps(BASE))
    assert cfg.d == 2 and cfg.task == "propagate"
    assert np.array_equal(cfg.hamiltonian, [[0, 1], [1, 0]])
    assert set(cfg.options["observables"]) == {"x", "y", "z"}


def test_lambda_mismatch_named():
    bad = copy.deepcopy(BASE)
    bad["system"]["lambdas"] = [1, 0, -1]
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(bad))
    assert any("system.lambdas" in p for p in info.value.problems)


def test_all_problems_reported():
    bad = copy.deepcopy(BASE)
    bad["system"]["lambdas"] = [1]
    bad["grid"]["dt"] = -0.1
    bad["bath"]["kind"] = "lattice"
    bad["truncation"]["max_rank"] = 0
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(bad))
    text = " ".join(info.value.problems)
    for key in ("system.lambdas", "grid.dt", "bath.kind", "truncation.max_rank"):
        assert key in text


def test_syntax_error_position():
    with pytest.raises(ConfigError) as info:
        parse_config('{\n  "system": {\n    "d": 2,,\n')
    assert "line 3" in info.value.problems[0] and "column" in info.value.problems[0]


def test_slot_validation():
    bad = config(kind="correlate", operator={"pauli": {"z": 1}}, observable={"pauli": {"z": 1}},
                 first_slots=[0, 6], second_slots=[3, 7])
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(bad))
    assert len(info.value.problems) == 2


def test_round_trip_idempotent():
    cfg = copy.deepcopy(BASE)
    cfg["system"]["pulses"] = [{"steps": 2, "hamiltonian": {"matrix": [[0, [0, -1]], [[0, 1], 0]]}}]
    cfg["system"]["rho0"] = {"diag": [0.25, 0.75]}
    cfg["bath"] = {"kind": "discrete", "frequencies": [1.0, 2.0], "couplings": [0.1, [0.0, 0.2]], "beta": "inf"}
    cfg["task"] = {"kind": "correlate", "operator": {"pauli": {"z": 1}}, "observable": {"pauli": {"x": 1}},
                   "first_slots": [0, 2], "second_slots": [3, 6], "side": "right"}
    once = dump_config(parse_config(json.dumps(cfg)))
    twice = dump_config(parse_config(once))
    assert once == twice
    a, b = parse_config(json.dumps(cfg)), parse_config(once)
    assert np.array_equal(a.pulses[0][1], b.pulses[0][1])
    assert np.array_equal(a.bath.couplings, b.bath.couplings)


def test_build_and_propagate(tmp_path):
    cfg = config(kind="build-pt")
    assert main(["build-pt", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "b")]) == 0
    pt = load_ptmp1(tmp_path / "b" / "pt.ptmp1")
    bonds = (tmp_path / "b" / "bonds.csv").read_text().splitlines()
    assert bonds[1] == "bond,extent" and len(bonds) == 2 + len(pt.tensors) - 1
    cfg = config(observables={"sz": {"pauli": {"z": 1}}})
    out = tmp_path / "p"
    args = ["propagate", "--config", write(tmp_path, cfg), "--out", str(out)]
    assert main(args + ["--pt", str(tmp_path / "b" / "pt.ptmp1")]) == 0
    reused = (out / "trajectory.csv").read_text()
    assert main(args) == 0
    assert (out / "trajectory.csv").read_text() == reused
    assert reused.splitlines()[1] == "t,re_sz,im_sz"


def test_correlate_and_ttm(tmp_path):
    cfg = config(kind="correlate", operator={"pauli": {"z": 1}}, observable={"pauli": {"z": 1}},
                 first_slots=[0, 2], second_slots=[2, 4, 6])
    assert main(["correlate", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "correlator.csv").read_text().splitlines()
    assert lines[1] == "t1,t2,re,im" and len(lines) == 2 + 5
    cfg = config(kind="ttm", K=4, n_target=12)
    assert main(["ttm", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    for name in ("maps.csv", "transfer.csv", "continuation.csv", "maps.ptmp1", "transfer.ptmp1"):
        assert (tmp_path / name).exists()
    assert len((tmp_path / "continuation.csv").read_text().splitlines()) == 2 + 13


def test_verify_zero_coupling(tmp_path):
    cfg = config(kind="verify", tolerance=1e-10)
    cfg["bath"]["amplitude"] = 0.0
    assert main(["verify", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] and {c["name"] for c in report["checks"]} >= {"dense", "trace", "reference"}


def _three_modes(dt, n, order, tol):
    cfg = config(kind="verify", order=order, tolerance=tol, n_max=4)
    cfg["system"]["hamiltonian"] = {"pauli": {"x": 1.5}}
    cfg["bath"] = {"kind": "discrete", "frequencies": [0.5, 1.5, 2.5],
                   "couplings": [0.0707, 0.1225, 0.1581], "beta": "inf"}
    cfg["grid"] = {"dt": dt, "n_steps": n, "n_mem": n}
    return cfg


def test_verify_three_modes(tmp_path):
    cfg = _three_modes(0.05, 30, "symmetric", 2e-3)
    assert main(["verify", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0


def test_verify_coarse_step_fails(tmp_path, capsys):
    cfg = _three_modes(0.4, 4, "first", 2e-3)
    assert main(["verify", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 1
    report = json.loads((tmp_path / "verify.json").read_text())
    ref = next(c for c in report["checks"] if c["name"] == "reference")
    assert not ref["passed"] and ref["nominal_order"] == 1
    assert ref["error_half_step"] < ref["error"]
    assert "observed_order" in ref
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("ptnet: verify-failed:")


def _run(args):
    return subprocess.run([sys.executable, "-m", "ptnet"] + args, capture_output=True, text=True)


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    r = _run(["propagate", "--config", str(bad)])
    assert r.returncode == 2 and r.stderr.count("\n") == 1 and r.stderr.startswith("ptnet: config-error:")
    r = _run(["propagate", "--config", str(tmp_path / "missing.json")])
    assert r.returncode == 4 and r.stderr.startswith("ptnet: io-error:")
    junk = tmp_path / "junk.ptmp1"
    junk.write_bytes(b"not a process tensor")
    r = _run(["propagate", "--config", write(tmp_path, BASE), "--pt", str(junk), "--out", str(tmp_path)])
    assert r.returncode == 4 and r.stderr.count("\n") == 1
    r = _run(["build-pt", "--config", write(tmp_path, BASE)])
    assert r.returncode == 2 and "task.kind" in r.stderr
    r = _run(["frobnicate", "--config", "x"])
    assert r.returncode == 2 and r.stderr.count("\n") == 1


def test_numeric_exit_code(tmp_path, monkeypatch):
    import ptnet.cli as cli
    from ptnet import NumericError

    def boom(*args, **kwargs):
        raise NumericError("quadrature not converged", estimate=1.0)

    monkeypatch.setattr(cli, "eta_table", boom)
    assert main(["propagate", "--config", write(tmp_path, BASE), "--out", str(tmp_path)]) == 3
