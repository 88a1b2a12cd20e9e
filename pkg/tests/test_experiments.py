import json

import numpy as np
import pytest

from hiercast.errors import ConfigError
from hiercast.experiments import (
    config_hash,
    load_config,
    run_experiment,
    twin_experiment,
    write_simulated_panels,
)
from hiercast.panel import read_panel


def sim_config(out, reps=2, approaches=None, **run_extra):
    return {
        "data": {"source": "simulate", "reps": reps, "m": 12, "length": 60},
        "windows": {"initial": 48, "horizon": 12},
        "run": {
            "approaches": approaches or ["base", "two-level", "Cluster-trend1"],
            "seed": 3,
            "out": str(out),
            **run_extra,
        },
    }


def test_run_experiment_artifacts(tmp_path):
    report, out = run_experiment(sim_config(tmp_path / "a"))
    assert report.scores.shape == (2, 3)
    assert (out / "rmsse.csv").exists()
    assert (out / "mcb.json").exists()
    assert (out / "mcb.svg").exists()
    assert (out / "manifest.json").exists()
    assert (out / "forecasts" / "base.csv").exists()
    payload = json.loads((out / "mcb.json").read_text())
    assert payload["labels"] == ["base", "two-level", "Cluster-trend1"]
    assert len(payload["mean_ranks"]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_hash"] == config_hash(manifest["config"])
    svg = (out / "mcb.svg").read_text()
    assert svg.startswith("<svg") and "mean rank" in svg


def test_rerun_from_manifest_bit_exact(tmp_path):
    _, out_a = run_experiment(sim_config(tmp_path / "a"))
    _, out_b = run_experiment(load_config(out_a / "manifest.json"), out_dir=tmp_path / "b")
    for name in ("rmsse.csv", "mcb.json", "mcb.svg"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
    for f in sorted((out_a / "forecasts").iterdir()):
        assert f.read_bytes() == (out_b / "forecasts" / f.name).read_bytes(), f.name


def test_combination_defaults_to_cluster_schemes(tmp_path):
    cfg = sim_config(
        tmp_path / "c",
        approaches=["base", "Cluster-trend1", "Cluster-season", "combination"],
    )
    report, _ = run_experiment(cfg)
    idx = {n: i for i, n in enumerate(report.labels)}
    mean = (report.scores[:, idx["Cluster-trend1"]] + report.scores[:, idx["Cluster-season"]])
    assert report.scores.shape[1] == 4


def test_unknown_approach_rejected(tmp_path):
    cfg = sim_config(tmp_path / "d", approaches=["base", "nonsense"])
    with pytest.raises(ConfigError):
        run_experiment(cfg)


def test_natural_requires_metadata(tmp_path):
    paths = write_simulated_panels(1, 0, tmp_path, m=12, length=60)
    cfg = {
        "data": {"source": "csv", "path": str(paths[0][0]), "seasonal_period": 2},
        "windows": {"initial": 40, "horizon": 12},
        "run": {"approaches": ["natural"], "out": str(tmp_path / "e")},
    }
    with pytest.raises(ConfigError):
        run_experiment(cfg)


def test_csv_experiment_with_natural(tmp_path):
    paths = write_simulated_panels(1, 1, tmp_path, m=12, length=60)
    hier = {"left": [f"b{i:02d}" for i in range(1, 7)],
            "right": [f"b{i:02d}" for i in range(7, 13)]}
    hpath = tmp_path / "h.json"
    hpath.write_text(json.dumps(hier))
    cfg = {
        "data": {"source": "csv", "path": str(paths[0][0]), "seasonal_period": 2,
                 "hierarchy": str(hpath)},
        "windows": {"initial": 44, "horizon": 8, "step": 8},
        "run": {"approaches": ["two-level", "natural"], "out": str(tmp_path / "f"),
                "write_forecasts": False},
    }
    report, out = run_experiment(cfg)
    assert report.labels == ("two-level", "natural")
    assert report.scores.shape == (2, 2)
    assert not (out / "forecasts").exists()


def test_twin_experiment_summary(tmp_path):
    cfg = sim_config(tmp_path / "g", reps=3,
                     approaches=["Cluster-trend-season"])
    cfg["run"]["twin"] = {"of": "Cluster-trend-season", "count": 4}
    report, out = twin_experiment(cfg)
    assert report.scores.shape == (3, 5)
    summary = json.loads((out / "twin_summary.json").read_text())
    assert summary["approach"] == "Cluster-trend-season"
    assert summary["twin_count"] == 4
    assert 1 <= summary["position"] <= 5
    assert len(summary["twin_mean_ranks"]) == 4


def test_twin_experiment_validation(tmp_path):
    cfg = sim_config(tmp_path / "h")
    with pytest.raises(ConfigError):
        twin_experiment(cfg)  # no twin table


def test_write_simulated_panels_roundtrip(tmp_path):
    paths = write_simulated_panels(2, 9, tmp_path / "sims", m=12, length=40)
    assert len(paths) == 2
    panel = read_panel(paths[0][0], 2)
    assert panel.n_obs == 40
    assert panel.n_bottom == 12
    labels = (tmp_path / "sims" / "labels_0.csv").read_text().splitlines()
    assert labels[0] == "series_id,cluster"
    assert len(labels) == 13


def test_toml_config(tmp_path):
    out = tmp_path / "t"
    toml = f"""
[data]
source = "simulate"
reps = 1
m = 12
length = 60

[windows]
initial = 48
horizon = 12

[run]
approaches = ["base", "two-level"]
seed = 1
out = "{out}"
write_forecasts = false
"""
    cfile = tmp_path / "exp.toml"
    cfile.write_text(toml)
    report, _ = run_experiment(cfile)
    assert report.labels == ("base", "two-level")


def test_threads_give_identical_results(tmp_path):
    a, _ = run_experiment(sim_config(tmp_path / "p1", reps=3, write_forecasts=False))
    b, _ = run_experiment(sim_config(tmp_path / "p2", reps=3, write_forecasts=False,
                                     threads=2))
    assert a.scores.tobytes() == b.scores.tobytes()
