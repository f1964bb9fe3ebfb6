from __future__ import annotations

import json

import pytest

from covapprox.cli import EXIT_ASSERT, EXIT_CONFIG, EXIT_OK, main


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_experiment_with_overrides(tmp_path):
    cfg = write(tmp_path, "c.json", {"experiment": "rademacher_bound", "k_d_pairs": [[2, 3]]})
    out = tmp_path / "r.json"
    assert main(["experiment", "rademacher_bound", "--config", cfg, "--trials", "1000", "--seed", "5", "--out", str(out), "--assert"]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["config"]["trials"] == 1000 and report["config"]["seed"] == 5
    assert (tmp_path / "r.json.sidecar.json").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["experiment", "nope"]) == EXIT_CONFIG
    assert "registered" in capsys.readouterr().err
    bad = write(tmp_path, "bad.json", {"experiment": "ellipsoid_l4", "eta": 0.3})
    assert main(["experiment", "ellipsoid_l4", "--config", bad]) == EXIT_CONFIG
    assert main(["experiment", "slab_gaussian", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    unknown = write(tmp_path, "u.json", {"experiment": "slab_gaussian", "colour": 1})
    assert main(["experiment", "slab_gaussian", "--config", unknown]) == EXIT_CONFIG


def test_assert_exit_3(tmp_path):
    # a smoothed slab body at this scale sits near 1.48 B, outside [0.95, 1.05]
    cfg = write(tmp_path, "c.json", {"experiment": "build", "d": 3, "N": 500, "eta": 0.05, "body": "slab"})
    args = ["certify", "--config", cfg, "--directions", "200", "--out", str(tmp_path / "r.json")]
    assert main(args) == EXIT_OK
    assert main(args + ["--assert"]) == EXIT_ASSERT


def test_build_certify_pipeline(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"experiment": "build", "distribution": {"kind": "heavy_tail_xu", "d": 4, "u": 1.0},
                                     "N": 300, "m": 3, "eta": 0.2, "body": "ellipsoid"})
    body = tmp_path / "body.json"
    assert main(["build", "--config", cfg, "--out", str(body)]) == EXIT_OK
    assert json.loads(body.read_text())["type"] == "ellipsoid"
    assert main(["certify", "--config", cfg, "--body", str(body), "--directions", "100", "--format", "csv"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("direction_count,min_ratio,max_ratio")


def test_estimate_m0_and_baseline(tmp_path, capsys):
    cfg = write(tmp_path, "m.json", {"experiment": "m0", "distribution": {"kind": "mixed_product", "marginal": "rademacher", "d": 2},
                                     "eta": 0.8, "candidates": [16, 256, 4096]})
    assert main(["estimate-m0", "--config", cfg, "--directions", "4", "--assert"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["aggregate"]["attained"] is True
    cfg = write(tmp_path, "b.json", {"experiment": "b", "distribution": {"kind": "gaussian", "d": 3}, "N": 100})
    assert main(["baseline", "--config", cfg, "--trials", "2", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "seed,d,N,p,deviation,max_norm_term,moment_term,truncation_term"
    assert len(lines) == 3


def test_list(capsys):
    assert main(["list"]) == EXIT_OK
    assert "baseline_failure" in capsys.readouterr().out


def test_bad_format_flag():
    with pytest.raises(SystemExit):
        main(["experiment", "psi_decay", "--format", "xml"])
