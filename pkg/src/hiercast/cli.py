"""Command-line entry points.

Failures print a machine-readable error JSON to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import approaches as appr
from .baseforecast import FitCache, forecast_panel
from .errors import ConfigError, HiercastError
from .evaluate import WindowContext
from .experiments import (
    run_experiment,
    twin_experiment,
    write_simulated_panels,
)
from .panel import (
    Grouping,
    HierarchySpec,
    read_natural_hierarchy,
    read_panel,
    summing_matrix,
    write_hierarchy,
)
from .permute import twin_batch
from .reconcile import estimate_w, reconcile, resolve_method
from .represent import feature_matrix, FEATURE_NAMES, row_standardized


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_forecast_csv(path, ids, matrix):
    h = matrix.shape[1]
    with open(path, "w") as fh:
        fh.write("id," + ",".join(f"h{i + 1}" for i in range(h)) + "\n")
        for sid, row in zip(ids, matrix):
            fh.write(f"{sid}," + ",".join(_fmt(v) for v in row) + "\n")


def _read_forecast_csv(path):
    with open(path) as fh:
        lines = [l.rstrip("\n") for l in fh if l.strip()]
    ids = []
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        ids.append(cells[0])
        rows.append([float(c) for c in cells[1:]])
    return ids, np.array(rows)


def _bundle_for(args, grouping=None):
    panel = read_panel(args.panel, args.seasonal_period, getattr(args, "hierarchy", None))
    if grouping is None:
        if getattr(args, "hierarchy", None):
            grouping = read_natural_hierarchy(args.hierarchy, panel).grouping
        else:
            grouping = Grouping(np.zeros((0, panel.n_bottom)))
    return panel, forecast_panel(panel, grouping, args.h)


def _cmd_simulate(args):
    paths = write_simulated_panels(args.reps, args.seed, args.out, args.m, args.length)
    print(f"wrote {len(paths)} replication(s) to {args.out}")


def _cmd_cluster(args):
    panel = read_panel(args.panel, args.seasonal_period)
    approach = appr.clustering_approach(args.approach)
    bottom = panel.bottom_values()
    cache = FitCache()
    models = [cache.fit(np.ascontiguousarray(bottom[:, j]), panel.seasonal_period)
              for j in range(panel.n_bottom)]
    residuals = np.column_stack([m.residuals for m in models])
    grouping = approach.builder(WindowContext(panel, residuals))
    write_hierarchy(grouping, panel.bottom_ids, args.out)
    print(f"{args.approach}: {grouping.k} middle series -> {args.out}")


def _cmd_forecast(args):
    panel, bundle = _bundle_for(args)
    _write_forecast_csv(args.out, bundle.ids, bundle.point_forecasts)
    if args.residuals:
        with open(args.residuals, "w") as fh:
            fh.write("id," + ",".join(f"t{i + 1}" for i in range(bundle.residuals.shape[0])) + "\n")
            for j, sid in enumerate(bundle.ids):
                fh.write(f"{sid}," + ",".join(_fmt(v) for v in bundle.residuals[:, j]) + "\n")
    print(f"wrote {len(bundle.ids)} series x {args.h} steps -> {args.out}")


def _cmd_reconcile(args):
    panel = read_panel(args.panel, args.seasonal_period, getattr(args, "hierarchy", None))
    if args.hierarchy:
        grouping = read_natural_hierarchy(args.hierarchy, panel).grouping
    else:
        grouping = Grouping(np.zeros((0, panel.n_bottom)))
    _, bundle = _bundle_for(args, grouping)
    cov = estimate_w(bundle.residuals, resolve_method(args.recon))
    summing = summing_matrix(HierarchySpec(grouping, panel.n_bottom))
    ytilde, _ = reconcile(summing, cov, bundle.point_forecasts)
    _write_forecast_csv(args.out, bundle.ids, ytilde)
    print(f"reconciled {len(bundle.ids)} series ({cov.method}, lambda={cov.lam:.4f}) -> {args.out}")


def _cmd_permute(args):
    with open(args.hierarchy) as fh:
        mapping = json.load(fh)
    bottom = []
    for members in mapping.values():
        for b in members:
            if b not in bottom:
                bottom.append(b)
    rows = np.array([[1.0 if b in members else 0.0 for b in bottom]
                     for members in mapping.values()])
    grouping = Grouping(rows, tuple(mapping))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    twins = twin_batch(grouping, args.count, args.seed)
    for i, tw in enumerate(twins):
        write_hierarchy(tw, bottom, out / f"twin_{i + 1:03d}.json")
    print(f"wrote {len(twins)} twin(s) to {out}")


def _cmd_combine(args):
    ids = None
    mats = []
    for path in args.inputs:
        file_ids, mat = _read_forecast_csv(path)
        if ids is None:
            ids = file_ids
        elif file_ids != ids:
            raise ConfigError(f"{path}: series ids do not match the first input")
        mats.append(mat)
    from .combine import combine as combine_op

    _write_forecast_csv(args.out, ids, combine_op(mats))
    print(f"combined {len(mats)} inputs -> {args.out}")


def _cmd_features(args):
    panel = read_panel(args.panel, args.seasonal_period)
    rows = panel.bottom_values().T
    if args.kind == "residual":
        cache = FitCache()
        rows = np.vstack([
            cache.fit(np.ascontiguousarray(col), panel.seasonal_period).residuals
            for col in panel.bottom_values().T
        ])
    feats = feature_matrix(rows, panel.seasonal_period)
    with open(args.out, "w") as fh:
        fh.write("series_id," + ",".join(FEATURE_NAMES) + "\n")
        for sid, row in zip(panel.bottom_ids, feats):
            fh.write(f"{sid}," + ",".join(_fmt(v) for v in row) + "\n")
    print(f"wrote {feats.shape[0]} x {feats.shape[1]} feature matrix -> {args.out}")


def _cmd_evaluate(args):
    config = {
        "data": {
            "source": "csv",
            "path": args.panel,
            "seasonal_period": args.seasonal_period,
            **({"hierarchy": args.hierarchy} if args.hierarchy else {}),
        },
        "windows": {"initial": args.initial, "horizon": args.h, "step": args.step},
        "run": {
            "approaches": args.approaches,
            "recon": args.recon,
            "seed": args.seed,
            "threads": args.threads,
            "out": args.out,
            "write_forecasts": not args.no_forecasts,
        },
    }
    report, out = run_experiment(config)
    _print_report(report, out)


def _cmd_run(args):
    report, out = run_experiment(args.config, out_dir=args.out)
    _print_report(report, out)


def _cmd_twin_run(args):
    report, out = twin_experiment(args.config, out_dir=args.out)
    _print_report(report, out)
    with open(Path(out) / "twin_summary.json") as fh:
        summary = json.load(fh)
    print(
        f"{summary['approach']}: mean rank {summary['mean_rank']:.2f}, "
        f"position {summary['position']} of {summary['twin_count'] + 1}"
    )


def _print_report(report, out):
    means = report.mean_scores
    for label, mean in zip(report.labels, means):
        print(f"{label}: {mean:.4f}")
    print(f"artifacts in {out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiercast")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write simulated panels and labels")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--m", type=int, default=120)
    p.add_argument("--length", type=int, default=144)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("cluster", help="emit one clustering approach's hierarchy JSON")
    p.add_argument("--panel", required=True)
    p.add_argument("--seasonal-period", type=int, required=True)
    p.add_argument("--approach", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("forecast", help="base forecasts for a hierarchy")
    p.add_argument("--panel", required=True)
    p.add_argument("--seasonal-period", type=int, required=True)
    p.add_argument("--h", type=int, default=12)
    p.add_argument("--hierarchy")
    p.add_argument("--residuals", help="optional residual matrix CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_forecast)

    p = sub.add_parser("reconcile", help="base forecasts projected to coherence")
    p.add_argument("--panel", required=True)
    p.add_argument("--seasonal-period", type=int, required=True)
    p.add_argument("--h", type=int, default=12)
    p.add_argument("--hierarchy")
    p.add_argument("--recon", default="mint", choices=["mint", "wls", "ols"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reconcile)

    p = sub.add_parser("permute", help="twin hierarchies by leaf permutation")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_permute)

    p = sub.add_parser("combine", help="equal-weight average of forecast CSVs")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("features", help="dump the per-series feature matrix")
    p.add_argument("--panel", required=True)
    p.add_argument("--seasonal-period", type=int, required=True)
    p.add_argument("--kind", default="raw", choices=["raw", "residual"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("evaluate", help="expanding-window backtest on a CSV panel")
    p.add_argument("--panel", required=True)
    p.add_argument("--seasonal-period", type=int, required=True)
    p.add_argument("--hierarchy")
    p.add_argument("--approaches", nargs="+", required=True)
    p.add_argument("--initial", type=int, default=96)
    p.add_argument("--h", type=int, default=12)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--recon", default="mint", choices=["mint", "wls", "ols"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-forecasts", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("run", help="run a full experiment from a config or manifest")
    p.add_argument("config")
    p.add_argument("--out", help="override the output directory")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("twin-run", help="evaluate an approach against its twins")
    p.add_argument("config")
    p.add_argument("--out", help="override the output directory")
    p.set_defaults(func=_cmd_twin_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except HiercastError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    except OSError as exc:
        json.dump({"error": "OSError", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
