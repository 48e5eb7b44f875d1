import csv
import json
import math

import pytest

from src.cli import RunConfig, main, resolve_threads
from src.io import ConfigError, read_json
from src.spectral import SpectralTriple


def _manifest(directory):
    return read_json(directory / "manifest.json")


def _rows(path):
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def test_solve_two_state_chain(models_dir, tmp_path):
    out = tmp_path / "solve"
    assert main(["solve", "--config", str(models_dir / "t2.json"), "--out", str(out)]) == 0
    payload = read_json(out / "spectral.json")
    triple = SpectralTriple.from_dict(payload)
    assert abs(triple.lambda0 - (2 - math.sqrt(2))) < 1e-12
    assert SpectralTriple.from_dict(json.loads(json.dumps(triple.to_dict()))) == triple
    manifest = _manifest(out)
    assert manifest["verdict"] == "OK"
    assert manifest["error"] is None
    assert manifest["summary"]["model"] == "t2"
    assert manifest["artifacts"] == ["spectral.json"]
    assert set(manifest["versions"]) >= {"python", "numpy", "scipy", "sympy", "qsdlab"}


def test_config_hash_ignores_threads(models_dir, tmp_path):
    config = str(models_dir / "t2.json")
    main(["solve", "--config", config, "--out", str(tmp_path / "a"), "--threads", "1"])
    main(["solve", "--config", config, "--out", str(tmp_path / "b"), "--threads", "3"])
    main(["solve", "--config", config, "--out", str(tmp_path / "c"), "--tol", "1e-8"])
    first, second, third = (_manifest(tmp_path / name) for name in "abc")
    assert first["config_hash"] == second["config_hash"] != third["config_hash"]
    assert second["run_info"]["threads"] == 3


def test_malformed_config_exits_with_one(models_dir, tmp_path):
    assert main(["solve", "--config", str(models_dir / "malformed.json"), "--out", str(tmp_path)]) == 1
    manifest = _manifest(tmp_path)
    assert manifest["verdict"] == "ERROR"
    assert "malformed.json:2:" in manifest["error"]


def test_missing_config_exits_with_one(tmp_path):
    assert main(["certify", "--out", str(tmp_path)]) == 1
    assert main(["certify", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1


def test_certify_writes_every_table(models_dir, tmp_path):
    assert main(["certify", "--config", str(models_dir / "t2.json"), "--out", str(tmp_path)]) == 0
    manifest = _manifest(tmp_path)
    for name in ("spectral.json", "certificate.json", "ratio_curve.csv", "tv_bound.csv", "spectrum.csv", "plot_results.py"):
        assert name in manifest["artifacts"]
        assert (tmp_path / name).exists()
    assert manifest["summary"]["tv_slack"] >= 0
    kinds = [row["kind"] for row in _rows(tmp_path / "spectrum.csv")]
    assert kinds == ["cemetery", "top", "gapped"]


def test_a1_failure_exits_with_two(models_dir, tmp_path):
    assert main(["certify", "--config", str(models_dir / "isolated_pair.json"), "--out", str(tmp_path)]) == 2
    manifest = _manifest(tmp_path)
    assert manifest["verdict"] == "A1-FAIL"
    assert "spectral.json" in manifest["artifacts"]


def test_birth_death_bound_holds_on_every_row(models_dir, tmp_path):
    assert main(["bd", "--config", str(models_dir / "logistic_bd.json"), "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "tv_bound.csv")
    assert len(rows) == 81
    for row in rows:
        assert float(row["sup_tv"]) <= float(row["bound"]) + 1e-9
        assert float(row["slack"]) == pytest.approx(float(row["bound"]) - float(row["sup_tv"]))
    series = read_json(tmp_path / "series.json")
    assert series["verdict"] == "converged"
    assert _manifest(tmp_path)["summary"]["series_verdict"] == "converged"


def test_multibd_cooperative_run(tmp_path):
    config = tmp_path / "coop.json"
    config.write_text(
        json.dumps(
            {
                "name": "coop",
                "multibd": {
                    "d": 2,
                    "lambda": [1.0, 0.5],
                    "mu": [0.5, 1.0],
                    "c": [[1.0, 0.25], [0.5, 2.0]],
                    "mode": "cooperative",
                    "cap": 3,
                },
                "series": {"K_max": 1000},
            }
        )
    )
    out = tmp_path / "run"
    assert main(["multibd", "--config", str(config), "--out", str(out)]) == 0
    weak = read_json(out / "weak_cooperation.json")
    assert weak["holds"] is True
    assert weak["inverse_beta"] == pytest.approx(2 / 3)
    assert read_json(out / "series.json")["z"] == 1
    assert _manifest(out)["summary"]["states"] == 9


def test_neutron_runs_are_reproducible(models_dir, tmp_path):
    config = str(models_dir / "unit_disk.json")
    assert main(["neutron", "--config", config, "--out", str(tmp_path / "a")]) == 0
    assert main(["neutron", "--config", config, "--out", str(tmp_path / "b"), "--threads", "4"]) == 0
    assert main(["neutron", "--config", config, "--out", str(tmp_path / "c"), "--seed", "8"]) == 0
    first = (tmp_path / "a" / "survival.csv").read_bytes()
    assert first == (tmp_path / "b" / "survival.csv").read_bytes()
    assert first != (tmp_path / "c" / "survival.csv").read_bytes()
    rows = _rows(tmp_path / "a" / "survival.csv")
    assert len(rows) == 17
    assert rows[0]["survivors"] == "1000"
    manifest = _manifest(tmp_path / "a")
    assert manifest["seed"] == 7
    assert manifest["summary"]["block_size"] == 4096
    assert _manifest(tmp_path / "c")["seed"] == 8
    if "decay.json" in manifest["artifacts"]:
        assert read_json(tmp_path / "a" / "decay.json")["rate"] > 0


def test_neutron_qsd_histogram(tmp_path):
    config = tmp_path / "square.json"
    config.write_text(
        json.dumps(
            {
                "domain": {"polygon": [[-1, -1], [1, -1], [1, 1], [-1, 1]]},
                "lambda": 2.0,
                "N": 1000,
                "t_grid": {"stop": 1.0, "step": 0.25},
                "window": [0.0, 1.0],
                "qsd": {"t_star": 0.5, "N": 10000, "mode": "naive", "bins": [2, 2, 2]},
            }
        )
    )
    assert main(["neutron", "--config", str(config), "--out", str(tmp_path / "out")]) == 0
    rows = _rows(tmp_path / "out" / "qsd_histogram.csv")
    assert len(rows) == 8
    assert sum(float(row["mass"]) for row in rows) == pytest.approx(1.0)
    assert "decay.json" in _manifest(tmp_path / "out")["artifacts"]


def test_resolve_threads():
    assert resolve_threads(None, {}) == 1
    assert resolve_threads(None, {"QSDLAB_THREADS": "6"}) == 6
    assert resolve_threads(2, {"QSDLAB_THREADS": "6"}) == 2
    with pytest.raises(ConfigError):
        resolve_threads(None, {"QSDLAB_THREADS": "many"})
    with pytest.raises(ConfigError):
        resolve_threads(0, {})


def test_run_config_checks(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(command="solve", out=tmp_path, seed=-1)
    with pytest.raises(ConfigError):
        RunConfig(command="plot", out=tmp_path)
    assert RunConfig(command="report", out=tmp_path).results_dir == tmp_path


def test_bad_thread_environment_exits_with_one(models_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("QSDLAB_THREADS", "zero")
    assert main(["solve", "--config", str(models_dir / "t2.json"), "--out", str(tmp_path)]) == 1
    assert not (tmp_path / "manifest.json").exists()


def test_out_is_required(models_dir):
    with pytest.raises(SystemExit):
        main(["solve", "--config", str(models_dir / "t2.json")])


def test_neutron_density_bound_and_assumption_b(tmp_path):
    config = tmp_path / "wide_disk.json"
    config.write_text(
        json.dumps(
            {
                "domain": {"disk": {"radius": 3.0}},
                "lambda": 1.0,
                "N": 500,
                "t_grid": {"stop": 1.0, "step": 0.25},
                "window": [0.0, 1.0],
                "density_bound": {"t": 0.5, "N": 20000, "cells": [4, 4], "arcs": 4},
                "assumption_b": {"epsilon": 0.3},
            }
        )
    )
    assert main(["neutron", "--config", str(config), "--out", str(tmp_path / "out")]) == 0
    rows = _rows(tmp_path / "out" / "density_bound.csv")
    assert len(rows) == 64
    assert {row["passed"] for row in rows} <= {"true", "false"}
    params = read_json(tmp_path / "out" / "assumption_b.json")
    assert params["verified"] is True
    assert params["epsilon"] == 0.3
