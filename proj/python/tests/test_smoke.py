import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import divfree

CONFIGS = Path(os.environ.get("DIVFREE_CONFIGS", Path(__file__).resolve().parents[2] / "configs"))


def laplace(cells=8, c=0.0, f=None):
    return {
        "suite": "well_posedness",
        "grid": {"dim": 3, "cells": cells},
        "fields": {
            "a": {"kind": "identity"},
            "h": {"kind": "zero"},
            "c": {"kind": "constant", "value": c},
            "f": f or {"kind": "trig", "frequencies": [1, 1, 1]},
        },
    }


def test_suite_registry():
    suites = divfree.list_suites()
    names = [s[0] for s in suites]
    assert len(suites) >= 6
    assert ("rough_c_ladder", "Theorem 4.2") in [(s[0], s[1]) for s in suites]
    assert "interpolation" in names


def test_exponent_spot_values():
    e = divfree.exponent_set(3, 3.0, 6.0)
    assert e["k"] == pytest.approx(2.0, abs=1e-12)
    assert e["q_theta"] == pytest.approx(12.0, abs=1e-12)
    assert e["p_theta"] == pytest.approx(1.5, abs=1e-12)
    assert e["s"] == pytest.approx(12.0 / 11.0, abs=1e-12)
    assert max(e["identities"].values()) <= 1e-12
    with pytest.raises(ValueError):
        divfree.exponent_set(3, 4.0, 6.0)


def test_sobolev_factor():
    assert divfree.sobolev_factor(3) == 4.0


def test_solve_sine_peak():
    # -Laplace u = 3 pi^2 prod sin(pi x_i) has u = prod sin(pi x_i), peak 1 at the center
    f = {"kind": "trig", "amplitude": 3 * math.pi**2, "frequencies": [1, 1, 1]}
    out = divfree.solve(laplace(16, f=f))
    u = out["nodal"].reshape(out["shape"], order="F")
    assert u.shape == (17, 17, 17)
    assert u[8, 8, 8] == pytest.approx(1.0, rel=0.02)
    assert np.all(u[0, :, :] == 0.0) and np.all(u[:, :, -1] == 0.0)
    assert out["method"]


def test_fredholm_matches_direct():
    cfg = laplace(8)
    cfg["fields"]["h"] = {"kind": "constant", "value": [1.0, 0.0, 0.0]}
    d = divfree.solve(cfg, method="direct")
    f = divfree.solve(cfg, method="fredholm")
    assert f["gamma"] > 0.0
    assert np.max(np.abs(d["nodal"] - f["nodal"])) <= 1e-8 * np.max(np.abs(d["nodal"]))


def test_constant_drift_density():
    cfg = laplace(16)
    cfg["fields"]["h"] = {"kind": "constant", "value": [1.0, 0.0, 0.0]}
    rho = divfree.compute_rho(cfg)
    assert rho["min"] > 0.0
    assert rho["harnack_ratio"] == pytest.approx(math.e, rel=0.02)
    assert rho["divergence_residual"] <= 1e-8
    assert rho["nodal"][rho["x1"]] == 1.0


def test_missing_field_names_it():
    cfg = laplace()
    del cfg["fields"]["c"]
    with pytest.raises(divfree.ConfigError, match=r"fields\.c: required"):
        divfree.solve(cfg)


def test_run_writes_reports(tmp_path):
    res = divfree.run(CONFIGS / "duality.toml", tmp_path / "a")
    assert res["passed"], res["failures"]
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["reports"][0]["anchor"]
    assert (tmp_path / "a" / "summary.txt").read_text().strip().endswith("PASS")
    divfree.run(CONFIGS / "duality.toml", tmp_path / "b")
    for csv in sorted((tmp_path / "a" / "tables").glob("*.csv")):
        assert csv.read_bytes() == (tmp_path / "b" / "tables" / csv.name).read_bytes()
