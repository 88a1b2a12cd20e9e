"""Config-driven experiments: simulate or ingest, evaluate, report.

A config (TOML or JSON) names the data source, the approaches, the window
plan, the reconciliation method and the seeds.  Artifacts are written to an
output directory together with a manifest holding the full normalized config
and its hash; re-running from the manifest reproduces every numeric output
bit-exactly.  All randomness flows from one root seed through labeled
substreams (replication r draws from ``(seed, 0, r)``, twin permutations
from ``(seed, 1)``).
"""

from __future__ import annotations

import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import approaches as appr
from .errors import ConfigError
from .evaluate import Approach, EvalReport, WindowPlan, mcb, run_backtest
from .panel import Grouping, read_natural_hierarchy, read_panel, write_panel
from .rankplot import render_rank_plot
from .simulate import SCHEMES, DgpConfig, cluster_labels, simulate_panel

SCHEME_APPROACHES = tuple(f"Cluster-{s}" for s in SCHEMES)

_FMT = "{:.12g}".format


def load_config(path) -> dict:
    """Read a TOML or JSON config; manifests (with a ``config`` key) unwrap."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        cfg = tomllib.loads(text.decode())
    else:
        cfg = json.loads(text)
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a table/object")
    if "config" in cfg and "config_hash" in cfg:
        cfg = cfg["config"]
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _normalize(cfg: dict) -> dict:
    data = dict(cfg.get("data", {}))
    run = dict(cfg.get("run", {}))
    windows = dict(cfg.get("windows", {}))
    source = data.get("source")
    if source not in ("simulate", "csv"):
        raise ConfigError("data.source must be 'simulate' or 'csv'")
    if source == "simulate":
        data.setdefault("reps", 1)
        data.setdefault("m", 120)
        data.setdefault("length", 144)
        data.setdefault("seasonal_period", 2)
    else:
        if "path" not in data:
            raise ConfigError("data.path is required for csv panels")
        if "seasonal_period" not in data:
            raise ConfigError("data.seasonal_period is required for csv panels")
    windows.setdefault("horizon", 12)
    windows.setdefault("step", 1)
    if source == "simulate":
        windows.setdefault("initial", data["length"] - windows["horizon"])
    else:
        windows.setdefault("initial", 96)
    if not run.get("approaches"):
        raise ConfigError("run.approaches must name at least one approach")
    run.setdefault("recon", "mint")
    run.setdefault("seed", 0)
    run.setdefault("alpha", 0.05)
    run.setdefault("threads", 1)
    run.setdefault("out", "artifacts")
    run.setdefault("write_forecasts", True)
    return {"data": data, "windows": windows, "run": run}


def _combination_components(names: list[str], cfg: dict) -> tuple[str, ...]:
    explicit = cfg["run"].get("combination")
    if explicit:
        missing = [c for c in explicit if c not in names]
        if missing:
            raise ConfigError(f"combination components not in the run: {missing}")
        return tuple(explicit)
    present = [n for n in names if n in appr.CLUSTERING_NAMES]
    if not present:
        present = [n for n in names if n in SCHEME_APPROACHES]
    if not present:
        raise ConfigError("combination requested but no cluster hierarchies in the run")
    return tuple(present)


def _resolve_approach(name: str, labels, natural: Grouping | None,
                      components: tuple[str, ...]) -> Approach:
    if name == "base":
        return appr.base_approach()
    if name == "two-level":
        return appr.two_level_approach()
    if name == "natural":
        if natural is None:
            raise ConfigError("the 'natural' approach needs data.hierarchy metadata")
        return appr.fixed_approach("natural", natural)
    if name == "grouped":
        return appr.grouped_approach()
    if name == "combination":
        return appr.combination_approach(components)
    if name in appr.CLUSTERING_NAMES:
        return appr.clustering_approach(name)
    if name in SCHEME_APPROACHES:
        if labels is None:
            raise ConfigError(f"{name!r} is only defined for simulated panels")
        return appr.scheme_approach(name.removeprefix("Cluster-"), labels)
    raise ConfigError(f"unknown approach {name!r}")


def build_approaches(names, labels=None, natural=None, components=(),
                     twins=None) -> list[Approach]:
    """Resolve approach names (plus optional twin expansions) to Approach objects.

    ``twins`` is a list of (display_name, inner_name, permutation) triples;
    each twin rebuilds the inner approach's grouping and permutes its leaves.
    """
    out = [_resolve_approach(n, labels, natural, components) for n in names]
    for display, inner_name, perm in twins or []:
        inner = _resolve_approach(inner_name, labels, natural, components)
        out.append(appr.twin_approach(inner, np.asarray(perm), display))
    return out


def draw_twin_perms(m: int, count: int, seed) -> list[np.ndarray]:
    rng = np.random.default_rng((_as_seed(seed), 1))
    return [rng.permutation(m) for _ in range(count)]


def _as_seed(seed) -> int:
    return int(seed)


def _sim_config(data: dict, seed, rep: int) -> DgpConfig:
    return DgpConfig(m=int(data["m"]), n_obs=int(data["length"]),
                     seed=(_as_seed(seed), 0, rep))


def _run_sim_rep(args):
    """One replication: simulate, backtest, return (rep, scores, forecasts)."""
    (rep, data, windows, run, names, twins, components) = args
    cfg = _sim_config(data, run["seed"], rep)
    panel, labels = simulate_panel(cfg)
    plan = WindowPlan(panel.n_obs, windows["initial"], windows["step"], windows["horizon"])
    approaches = build_approaches(names, labels=labels, components=components, twins=twins)
    report, forecasts = run_backtest(
        panel, approaches, plan, recon_method_from(run["recon"]),
        alpha=run["alpha"], collect_forecasts=True,
    )
    bottom_ids = (panel.top_id,) + panel.bottom_ids
    return rep, report.scores, forecasts if run["write_forecasts"] else None, bottom_ids


def recon_method_from(name: str) -> str:
    from .reconcile import resolve_method

    return resolve_method(name)


def run_experiment(config, out_dir=None, extra_twins=None):
    """Execute a config end to end and write artifacts; returns (report, dir).

    ``extra_twins`` extends the approach list with permutation twins (used by
    :func:`twin_experiment`).
    """
    cfg = _normalize(config if isinstance(config, dict) else load_config(config))
    data, windows, run = cfg["data"], cfg["windows"], cfg["run"]
    names = list(run["approaches"])
    if len(set(names)) != len(names):
        raise ConfigError("duplicate approach names")
    components = (
        _combination_components(names, cfg) if "combination" in names else ()
    )
    twins = extra_twins or []
    out = Path(out_dir if out_dir is not None else run["out"])
    out.mkdir(parents=True, exist_ok=True)

    if data["source"] == "simulate":
        report, forecast_rows, series_ids = _run_simulation(cfg, names, twins, components)
    else:
        report, forecast_rows, series_ids = _run_csv(cfg, names, twins, components)

    _write_artifacts(cfg, report, forecast_rows, series_ids, out)
    return report, out


def _run_simulation(cfg, names, twins, components):
    data, windows, run = cfg["data"], cfg["windows"], cfg["run"]
    reps = int(data["reps"])
    tasks = [(r, data, windows, run, names, twins, components) for r in range(reps)]
    threads = int(run["threads"])
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_sim_rep, tasks))
    else:
        results = [_run_sim_rep(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    labels = tuple(names) + tuple(t[0] for t in twins)
    scores = np.vstack([r[1] for r in results])
    series_ids = results[0][3]
    forecast_rows = None
    if run["write_forecasts"]:
        forecast_rows = []
        for rep, _, forecasts, _ in results:
            for w, per_window in enumerate(forecasts):
                forecast_rows.append((rep * max(len(forecasts), 1) + w, per_window))
    report = EvalReport(labels, scores, run["alpha"])
    return report, forecast_rows, series_ids


def _run_csv(cfg, names, twins, components):
    data, windows, run = cfg["data"], cfg["windows"], cfg["run"]
    panel = read_panel(data["path"], int(data["seasonal_period"]), data.get("hierarchy"))
    natural = None
    if data.get("hierarchy"):
        natural = read_natural_hierarchy(data["hierarchy"], panel).grouping
    elif "natural" in names:
        raise ConfigError("the 'natural' approach needs data.hierarchy metadata")
    plan = WindowPlan(panel.n_obs, windows["initial"], windows["step"], windows["horizon"])
    approaches = build_approaches(names, natural=natural, components=components, twins=twins)
    report, forecasts = run_backtest(
        panel, approaches, plan, recon_method_from(run["recon"]),
        alpha=run["alpha"], collect_forecasts=True,
    )
    series_ids = (panel.top_id,) + panel.bottom_ids
    rows = [(w, fc) for w, fc in enumerate(forecasts)] if run["write_forecasts"] else None
    return report, rows, series_ids


def twin_experiment(config, out_dir=None):
    """Evaluate a base approach against its permutation twins.

    The config's ``run.twin`` table names the approach (``of``) and the twin
    ``count``.  Writes the usual artifacts plus a rank-position summary.
    """
    cfg = _normalize(config if isinstance(config, dict) else load_config(config))
    twin_cfg = cfg["run"].get("twin") or {}
    inner = twin_cfg.get("of")
    count = int(twin_cfg.get("count", 0))
    if not inner or count < 1:
        raise ConfigError("twin-run needs run.twin = {of: <approach>, count: >=1}")
    if inner not in cfg["run"]["approaches"]:
        raise ConfigError(f"twin base approach {inner!r} must be in run.approaches")
    if cfg["data"]["source"] == "simulate":
        m = int(cfg["data"]["m"])
    else:
        panel = read_panel(cfg["data"]["path"], int(cfg["data"]["seasonal_period"]),
                           cfg["data"].get("hierarchy"))
        m = panel.n_bottom
    perms = draw_twin_perms(m, count, cfg["run"]["seed"])
    twins = [(f"{inner}-twin{i + 1:03d}", inner, p) for i, p in enumerate(perms)]
    report, out = run_experiment(cfg, out_dir, extra_twins=twins)
    summary = twin_summary(report, inner, [t[0] for t in twins])
    with open(Path(out) / "twin_summary.json", "w") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    return report, out


def twin_summary(report: EvalReport, inner: str, twin_names: list[str]) -> dict:
    """Where the base approach's mean rank sits among its twins."""
    members = [inner] + twin_names
    idx = [report.labels.index(n) for n in members]
    sub = report.scores[:, idx]
    comparison = mcb(sub, report.alpha, members)
    order = np.argsort(comparison.mean_ranks, kind="stable")
    position = int(np.flatnonzero(order == 0)[0]) + 1
    return {
        "approach": inner,
        "twin_count": len(twin_names),
        "mean_rank": float(comparison.mean_ranks[0]),
        "position": position,
        "half_width": comparison.half_width,
        "n_better_twins": int((comparison.mean_ranks[1:] < comparison.mean_ranks[0]).sum()),
        "indistinguishable_from_best": comparison.indistinguishable_from_best()[0].item(),
        "twin_mean_ranks": {n: float(r) for n, r in zip(members[1:], comparison.mean_ranks[1:])},
    }


def _write_artifacts(cfg, report, forecast_rows, series_ids, out: Path):
    manifest = {
        "config": cfg,
        "config_hash": config_hash(cfg),
        "approaches": list(report.labels),
        "outputs": ["rmsse.csv", "mcb.json", "mcb.svg"],
    }
    with open(out / "rmsse.csv", "w") as fh:
        fh.write("window,approach,score\n")
        for w in range(report.scores.shape[0]):
            for j, label in enumerate(report.labels):
                fh.write(f"{w},{label},{_FMT(report.scores[w, j])}\n")
    result = report.rank_test()
    mcb_payload = {
        "alpha": result.alpha,
        "labels": list(result.labels),
        "mean_ranks": [float(r) for r in result.mean_ranks],
        "half_width": result.half_width,
        "intervals": [[float(a), float(b)] for a, b in result.intervals],
        "best": result.labels[result.best],
        "indistinguishable_from_best": [
            label for label, ok in zip(result.labels, result.indistinguishable_from_best()) if ok
        ],
    }
    with open(out / "mcb.json", "w") as fh:
        json.dump(mcb_payload, fh, indent=1)
        fh.write("\n")
    render_rank_plot(result, out / "mcb.svg")
    if forecast_rows is not None:
        fdir = out / "forecasts"
        fdir.mkdir(exist_ok=True)
        manifest["outputs"].append("forecasts/")
        for label in report.labels:
            fname = fdir / f"{_safe_name(label)}.csv"
            with open(fname, "w") as fh:
                horizon = next(iter(forecast_rows[0][1].values())).shape[1]
                fh.write("window,id," + ",".join(f"h{i + 1}" for i in range(horizon)) + "\n")
                for w, per_window in forecast_rows:
                    mat = per_window[label]
                    for sid, row in zip(series_ids, mat):
                        fh.write(f"{w},{sid}," + ",".join(_FMT(v) for v in row) + "\n")
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _safe_name(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)


def write_simulated_panels(reps: int, seed, out_dir, m: int = 120, length: int = 144):
    """Emit one panel CSV and one labels CSV per replication (CLI `simulate`)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = len(str(max(reps - 1, 1)))
    paths = []
    for rep in range(reps):
        panel, labels = simulate_panel(DgpConfig(m=m, n_obs=length, seed=(_as_seed(seed), 0, rep)))
        ppath = out / f"panel_{rep:0{width}d}.csv"
        lpath = out / f"labels_{rep:0{width}d}.csv"
        write_panel(panel, ppath)
        with open(lpath, "w") as fh:
            fh.write("series_id,cluster\n")
            for sid, lab in zip(panel.bottom_ids, labels):
                fh.write(f"{sid},{lab}\n")
        paths.append((ppath, lpath))
    return paths
