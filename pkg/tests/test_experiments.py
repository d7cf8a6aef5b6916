"""Experiment runners and the su3vqe command-line interface."""

import json
import os

import numpy as np
import pytest

from su3vqe import cli
from su3vqe import experiments as ex


def _csv_body(path):
    """Data lines of an output CSV, provenance comments stripped."""
    with open(path) as f:
        return [ln for ln in f.read().splitlines() if not ln.startswith("#")]


def _csv_header_comments(path):
    with open(path) as f:
        return [ln for ln in f.read().splitlines() if ln.startswith("#")]


def test_make_config_unknown_experiment():
    with pytest.raises(ex.ConfigError):
        ex.make_config("free-lunch")


def test_make_config_unknown_key():
    with pytest.raises(ex.ConfigError):
        ex.make_config("krylov-scaling", {"cutof": 9})


def test_make_config_merges_overrides():
    cfg = ex.make_config("krylov-scaling", {"cutoff": 9}, {"points": 3})
    assert cfg["cutoff"] == 9
    assert cfg["points"] == 3
    assert cfg["threshold"] == 0.999999


def test_linear_fit_exact_line():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    slope, intercept, r2 = ex.linear_fit(x, 2.0 * x - 1.0)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(-1.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_cli_rejects_malformed_set(tmp_path, capsys):
    out = tmp_path / "o"
    rc = cli.main(["krylov-scaling", "--set", "bogus", "--out", str(out)])
    assert rc == 2
    assert not out.exists()  # config errors exit before any computation


def test_cli_rejects_unknown_key(tmp_path, capsys):
    out = tmp_path / "o"
    rc = cli.main(["krylov-scaling", "--set", "no_such_key=1",
                   "--out", str(out)])
    assert rc == 2
    assert not out.exists()


def test_cli_numerical_failure_writes_partial_csv(tmp_path, capsys):
    out = tmp_path / "o"
    rc = cli.main(["krylov-scaling", "--set", "threshold=1.5",
                   "--set", "cutoff=3", "--set", "points=2",
                   "--out", str(out)])
    assert rc == 3
    body = _csv_body(out / "krylov_scaling.csv")
    assert body[0] == "g,required_dim,flag"
    for line in body[1:]:
        g, d, flag = line.split(",", 2)
        assert d == "-1"
        assert flag.startswith("unreachable")


def test_krylov_scan_small(tmp_path, capsys):
    out = tmp_path / "a"
    rc = cli.main(["krylov-scaling", "--set", "cutoff=7",
                   "--set", "points=5", "--set", "g_min=0.4",
                   "--out", str(out)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["failed"] == 0
    path = out / "krylov_scaling.csv"
    comments = _csv_header_comments(path)
    assert comments[0] == "# experiment: krylov-scaling"
    cfg_line = next(c for c in comments if c.startswith("# config: "))
    assert json.loads(cfg_line[len("# config: "):])["cutoff"] == 7
    dims = [int(ln.split(",")[1]) for ln in _csv_body(path)[1:]]
    assert dims == sorted(dims, reverse=True)  # harder at weaker coupling
    assert all(d >= 1 for d in dims)


def test_krylov_scan_deterministic(tmp_path, capsys):
    args = ["krylov-scaling", "--set", "cutoff=5", "--set", "points=3",
            "--set", "g_min=0.5"]
    assert cli.main(args + ["--out", str(tmp_path / "r1")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "r2")]) == 0
    capsys.readouterr()
    b1 = _csv_body(tmp_path / "r1" / "krylov_scaling.csv")
    b2 = _csv_body(tmp_path / "r2" / "krylov_scaling.csv")
    assert b1 == b2


def test_krylov_inset_mode(tmp_path, capsys):
    out = tmp_path / "i"
    rc = cli.main(["krylov-scaling", "--set", "mode=inset",
                   "--set", "cutoff=9", "--set", "max_dim=12",
                   "--out", str(out)])
    assert rc == 0
    body = _csv_body(out / "krylov_inset.csv")
    assert body[0] == "dim,overlap_sq"
    ov = [float(ln.split(",")[1]) for ln in body[1:]]
    assert len(ov) == 12
    assert all(0.0 <= o <= 1.0 + 1e-12 for o in ov)
    assert np.all(np.diff(ov) >= -1e-10)


def test_gd_scaling_small(tmp_path, capsys):
    out = tmp_path / "g"
    rc = cli.main(["gd-scaling", "--set", "cutoff=3", "--set", "points=3",
                   "--set", "g_min=0.5", "--set", "overlap_threshold=0.9",
                   "--set", "max_steps=5000", "--out", str(out)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["failed"] == 0
    steps = [int(ln.split(",")[1])
             for ln in _csv_body(out / "gd_steps_vs_g.csv")[1:]]
    # 0 steps is legal (start already past the target); at least the
    # weakest-coupling point needs real descent
    assert all(s >= 0 for s in steps)
    assert max(steps) >= 1


def test_optimizer_comparison_tiny(tmp_path):
    cfg = {"gd_steps": 5, "bo_evaluations": 4, "bo_lambdas": [1e-2],
           "sweep_dims": [1], "sweep_evaluations": 4}
    summary = ex.run_optimizer_comparison(cfg, str(tmp_path))
    assert summary["gd_relative_error"] >= 0.0
    assert "0.01" in summary["bo"]
    assert len(summary["krylov_sweep_improved"]) == 1
    for path in summary["files"]:
        assert os.path.exists(path)
    with open(os.path.join(tmp_path, "optimizer_gd.csv")) as f:
        data = [ln for ln in f.read().splitlines() if not ln.startswith("#")]
    assert data[0] == "iter,energy,grad_norm,eta,relative_error"


def test_hardware_analogue_single_system(tmp_path, capsys):
    out = tmp_path / "h"
    rc = cli.main(["hardware-analogue", "--set", 'systems=["trunc8"]',
                   "--out", str(out)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    res = summary["systems"]["trunc8"]
    assert res["bound_ok"]
    for label in ("electric", "krylov"):
        assert res[label]["reached_tol"]
        assert res[label]["final_energy"] >= res["e0"] - 1e-9
        assert res[label]["final_energy"] <= res["bound"] + 1e-6


def test_tebd_vacuum_strong_coupling(tmp_path, capsys):
    out = tmp_path / "t"
    rc = cli.main(["tebd-vacuum", "--set", "g=5.0", "--set", "chi=8",
                   "--set", "schedule=[[0.1,10],[0.01,5]]",
                   "--out", str(out)])
    assert rc == 0
    files = list(out.glob("*.json"))
    assert files
    with open(files[0]) as f:
        record = json.load(f)
    assert record["experiment"] == "tebd-vacuum"
    assert abs(record["result"]["plaq_expectation"]) < 0.01


def test_write_json_provenance(tmp_path):
    path = ex.write_json(tmp_path / "x.json", {"a": 1}, "tebd-vacuum",
                         {"g": 0.9})
    with open(path) as f:
        rec = json.load(f)
    assert rec["result"] == {"a": 1}
    assert rec["config"] == {"g": 0.9}
    assert "version" in rec and "generated" in rec
