import json
import subprocess
import sys

import numpy as np
import pytest

from bilinear_gmle.cli import main
from bilinear_gmle.model import read_series_csv


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def series_csv(tmp_path):
    path = tmp_path / "y.csv"
    assert run("simulate", "--mu", 0, "--phi", 0.9, "--b", 1, "--sigma2", 1, "--n", 1000, "--seed", 7, "-o", path) == 0
    return path


def test_simulate_happy_path(series_csv):
    lines = series_csv.read_text().splitlines()
    assert lines[0] == "y" and len(lines) == 1001
    manifest = json.loads((series_csv.parent / "y.csv.manifest.json").read_text())
    assert manifest["command"] == "simulate" and manifest["seed"] == 7
    assert manifest["resolved"]["n"] == 1000 and "version" in manifest


def test_simulate_refuses_nonstationary(tmp_path, capsys):
    assert run("simulate", "--phi", 0, "--b", 2, "--sigma2", 1, "--n", 100, "-o", tmp_path / "y.csv") == 3
    assert "gamma" in capsys.readouterr().err
    assert run("simulate", "--phi", 0, "--b", 2, "--n", 100, "--force", "-o", tmp_path / "y.csv") == 0


def test_simulate_rejects_short_series(tmp_path):
    assert run("simulate", "--phi", 0.5, "--b", 0.5, "--n", 3, "-o", tmp_path / "y.csv") == 2


def test_estimate_round_trip(tmp_path):
    path = tmp_path / "y.csv"
    run("simulate", "--phi", 0.9, "--b", 1, "--n", 200, "--seed", 3, "-o", path)
    out = tmp_path / "fit.json"
    assert run("estimate", path, "-o", out) == 0
    fit = json.loads(out.read_text())
    th, se = fit["theta_hat"], fit["se"]
    assert abs(th["phi"] - 0.9) < 0.15
    truth = {"mu": 0.0, "phi": 0.9, "sigma2": 1.0, "b2": 1.0}
    for k, v in truth.items():
        assert abs(th[k] - v) < 3 * se[k]
    assert len(fit["sandwich"]) == 16
    assert fit["interval_method"] == "wald"
    names = [ci["parameter"] for ci in fit["confidence_intervals"]]
    assert names == ["mu", "phi", "sigma2", "b2", "b"]


def test_estimate_boundary_mode_uses_limit_law(tmp_path):
    for seed in range(40):
        path = tmp_path / "y.csv"
        run("simulate", "--phi", 0.5, "--b", 0, "--n", 300, "--seed", seed, "-o", path)
        out = tmp_path / "fit.json"
        assert run("estimate", path, "--mode", "boundary", "-o", out) == 0
        fit = json.loads(out.read_text())
        if fit["at_boundary"]:
            assert fit["interval_method"] == "boundary_limit"
            b2 = [c for c in fit["confidence_intervals"] if c["parameter"] == "b2"][0]
            assert b2["lo"] >= 0
            return
    pytest.fail("no boundary fit found")


def test_estimate_bad_inputs(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run("estimate", empty) == 2
    header_only = tmp_path / "h.csv"
    header_only.write_text("y\n")
    assert run("estimate", header_only) == 2
    const = tmp_path / "c.csv"
    const.write_text("y\n" + "2.5\n" * 50)
    assert run("estimate", const) == 4
    assert run("estimate", tmp_path / "missing.csv") == 2


def test_test_exit_codes(tmp_path, series_csv):
    out = tmp_path / "t.json"
    assert run("test", series_csv, "-o", out) in (0, 1)
    res = json.loads(out.read_text())
    assert set(res) == {"statistic", "critical_value", "level", "reject", "sigma44_null"}
    assert run("test", series_csv, "-o", out) == (1 if res["reject"] else 0)
    assert run("test", series_csv, "--level", 1.0, "-o", out) == 1
    null = tmp_path / "null.csv"
    run("simulate", "--phi", 0.5, "--b", 0, "--n", 500, "--seed", 1, "-o", null)
    assert run("test", null, "-o", out) == (1 if json.loads(out.read_text())["reject"] else 0)


def test_region_outputs(tmp_path):
    csv = tmp_path / "r.csv"
    args = ["region", "--phi-min", -1, "--phi-max", 1, "--phi-num", 3, "--b-min", 0, "--b-max", 2, "--b-num", 3]
    assert run(*args, "-o", csv) == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "phi,b,gamma,std_error,stationary"
    assert len(lines) == 10
    row = dict(zip(lines[0].split(","), lines[1 + 3 * 1 + 0].split(",")))  # phi = 0, b = 0
    assert row["gamma"] == "-inf" and row["stationary"] == "true"
    js = tmp_path / "r.json"
    assert run(*args, "--format", "json", "-o", js) == 0
    records = json.loads(js.read_text())
    assert len(records) == 9
    assert [r["stationary"] for r in records if r["b"] == 0.0] == [False, True, False]


def test_montecarlo_and_rerun_are_reproducible(tmp_path):
    config = tmp_path / "spec.json"
    config.write_text(json.dumps({
        "mode": "estimation",
        "master_seed": 5,
        "cells": [{"phi": 0.9, "b": 1.0, "n": 100, "replications": 4},
                  {"phi": 0.0, "b_star": 1.0, "n": 100, "replications": 4}],
    }))
    out = tmp_path / "mc.csv"
    assert run("montecarlo", "--config", config, "-o", out, "--spec-out", tmp_path / "resolved.json") == 0
    first = out.read_bytes()
    assert json.loads((tmp_path / "resolved.json").read_text())["master_seed"] == 5
    out.unlink()
    assert run("rerun", str(out) + ".manifest.json") == 0
    assert out.read_bytes() == first


def test_simulate_rerun_is_bit_identical(series_csv):
    first = series_csv.read_bytes()
    series_csv.unlink()
    assert run("rerun", str(series_csv) + ".manifest.json") == 0
    assert series_csv.read_bytes() == first
    data = read_series_csv(series_csv)
    assert np.isfinite(data.values).all()


def test_montecarlo_requires_one_source(tmp_path):
    assert run("montecarlo", "-o", tmp_path / "x.csv") == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bilinear_gmle", "simulate", "--phi", "0.5", "--b", "0.5", "--n", "10"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "y" and len(proc.stdout.splitlines()) == 11
    help_text = subprocess.run([sys.executable, "-m", "bilinear_gmle", "--help"], capture_output=True, text=True).stdout
    assert "Exit codes" in help_text
