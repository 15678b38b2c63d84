"""Command-line entry point: ``goa-osfs <subcommand> ...``.

Subcommands
-----------
simulate    write a Gaussian-mixture dataset CSV
stream-run  one (algorithm, scenario, delta) run: report, traces, manifest
compare     GOA threshold grid against a baseline under the fair-comparison rule
cache       dump pairwise CGD estimates (and optionally one pair's EMST)
report      aggregate report JSON files into table and plot-series CSVs

The output directory comes from ``--out``, else ``$GOA_OSFS_OUTPUT``, else
the config file's ``output_dir``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .data import load_csv, load_train_test, write_csv
from .dependency import cgd_point_set, cgd_store, pair_seed, zscore
from .emst import build_emst, write_edges_csv
from .evaluation import GOA_GRID, XSAOLA_GRID, RunReport, fair_compare, pick_baseline, run_grid
from .reporting import load_reports, write_series, write_table
from .seeding import derive_seed
from .streaming import gen_gaussian_simulation

OUTPUT_ENV = "GOA_OSFS_OUTPUT"

# flag dest -> ExperimentConfig field, for flags that override config values
OVERRIDES = {
    "data": "data", "test": "test", "label": "label", "header": "header",
    "sim_classes": "sim_classes", "sim_dims": "sim_dims", "sim_per_class": "sim_per_class",
    "scenario": "scenario", "spans": "spans", "b2_min_fraction": "b2_min_fraction",
    "min_per_class": "min_per_class", "shuffle_features": "shuffle_features",
    "algo": "algorithm", "delta": "delta", "bins": "bins", "quantifier": "quantifier",
    "knn_k": "knn_k", "svm_epochs": "svm_epochs", "svm_lr": "svm_lr", "svm_reg": "svm_reg",
    "trials": "trials", "train_fraction": "train_fraction", "grid": "grid",
    "classifier": "classifier", "seed": "seed",
}


def _add_experiment_args(p, algo=True):
    g = p.add_argument_group("input")
    g.add_argument("--config", help="INI experiment config; flags override its values")
    g.add_argument("--manifest", help="manifest.json of an earlier run to repeat")
    g.add_argument("--data", help="CSV with features and a label column")
    g.add_argument("--test", help="held-out CSV; gives a fixed split (single trial)")
    g.add_argument("--label", help="label column name or index (default: last)")
    g.add_argument("--no-header", dest="header", action="store_const", const=False,
                   default=None, help="CSV files have no header row")
    g.add_argument("--sim-classes", type=int, help="simulate instead of reading --data")
    g.add_argument("--sim-dims", type=int)
    g.add_argument("--sim-per-class", type=int)
    g = p.add_argument_group("stream")
    g.add_argument("--scenario", type=str.upper, choices=["A", "B1", "B2", "B3"])
    g.add_argument("--spans", type=int, help="B3: windows each feature spans")
    g.add_argument("--b2-min-fraction", type=float)
    g.add_argument("--min-per-class", type=int)
    g.add_argument("--shuffle-features", type=int, metavar="SEED",
                   help="shuffle the feature arrival order with this seed")
    g = p.add_argument_group("selector")
    if algo:
        g.add_argument("--algo", type=str.upper, choices=["GOA", "XSAOLA"])
        g.add_argument("--delta", type=float)
    g.add_argument("--bins", type=int, help="histogram bins for mutual information")
    g.add_argument("--quantifier", choices=["exists", "forall"])
    g = p.add_argument_group("evaluation")
    g.add_argument("--knn-k", type=int)
    g.add_argument("--svm-epochs", type=int)
    g.add_argument("--svm-lr", type=float)
    g.add_argument("--svm-reg", type=float)
    g.add_argument("--trials", type=int)
    g.add_argument("--train-fraction", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output directory")


def _experiment(args) -> ExperimentConfig:
    if args.manifest:
        cfg = ExperimentConfig.from_dict(json.loads(Path(args.manifest).read_text())["config"])
    elif args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        cfg = ExperimentConfig()
    for dest, name in OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is not None:
            setattr(cfg, name, v)
    return cfg.validate()


def _output_dir(args, cfg) -> Path:
    out = args.out or os.environ.get(OUTPUT_ENV) or cfg.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(cfg: ExperimentConfig):
    if cfg.data is None:
        if cfg.sim_dims is None or cfg.sim_per_class is None:
            raise ValueError("simulation needs sim_classes, sim_dims and sim_per_class")
        return gen_gaussian_simulation(cfg.sim_classes, cfg.sim_dims, cfg.sim_per_class,
                                       derive_seed(cfg.seed, "simulate"))
    if cfg.test:
        return load_train_test(cfg.data, cfg.test, cfg.label, cfg.header)
    return load_csv(cfg.data, cfg.label, cfg.header)


def _grid(text, default):
    if not text:
        return list(default)
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"bad grid {text!r}: expected comma-separated numbers") from None
    if not vals:
        raise ValueError("empty grid")
    return vals


def _write(path: Path, text: str) -> None:
    path.write_text(text if text.endswith("\n") else text + "\n")


def _manifest(cfg, dataset, command, out: Path, extra=None) -> None:
    ntr = 1 if dataset.fixed_split is not None else cfg.trials
    seeds = {
        "trials": derive_seed(cfg.seed, "trials"),
        "stream": [derive_seed(cfg.seed, "stream", i) for i in range(ntr)],
        "selector": [derive_seed(cfg.seed, "selector", i) for i in range(ntr)],
        "svm": [derive_seed(cfg.seed, "svm", i) for i in range(ntr)],
    }
    if cfg.data is None:
        seeds["simulate"] = derive_seed(cfg.seed, "simulate")
    doc = {"tool": "goa-osfs", "version": __version__, "command": command,
           "config": cfg.to_dict(), "dataset": dataset.name,
           "dataset_fingerprint": dataset.fingerprint, "seeds": seeds}
    doc.update(extra or {})
    _write(out / "manifest.json", json.dumps(doc, indent=2, sort_keys=True))


def cmd_simulate(args) -> int:
    ds = gen_gaussian_simulation(args.classes, args.dims, args.per_class, args.seed)
    write_csv(ds, args.output)
    print(f"wrote {ds.n_samples} rows x {ds.n_features} features to {args.output}")
    return 0


def cmd_stream_run(args) -> int:
    cfg = _experiment(args)
    ds = _load(cfg)
    out = _output_dir(args, cfg)
    t0 = time.perf_counter()
    reports, states = run_grid(ds, cfg.algorithm, [cfg.delta], cfg.scenario_spec(),
                               cfg.eval_settings(), cfg.seed, keep_states=True)
    report = reports[0]
    _write(out / "report.json", report.to_json(timing=False))
    for (_, ti), st in sorted(states.items(), key=lambda kv: kv[0][1]):
        st.write_trace(out / f"trace_trial{ti}.jsonl")
    _write(out / "timing.json", json.dumps(
        {"runtime_ms": report.runtime_ms,
         "wall_ms": int(round((time.perf_counter() - t0) * 1000))}, indent=2))
    _manifest(cfg, ds, "stream-run", out)
    print(f"{report.algorithm} {report.scenario} delta={report.delta:g}: "
          f"{report.n_selected} features, knn={report.acc_knn:.4f}, svm={report.acc_svm:.4f}")
    return 0


def cmd_compare(args) -> int:
    cfg = _experiment(args)
    ds = _load(cfg)
    out = _output_dir(args, cfg)
    spec, settings = cfg.scenario_spec(), cfg.eval_settings()
    t0 = time.perf_counter()
    goa = run_grid(ds, "GOA", _grid(cfg.grid, GOA_GRID), spec, settings, cfg.seed)
    if args.baseline:
        baseline = RunReport.load(args.baseline)
        base_grid = []
    else:
        base_grid = run_grid(ds, args.baseline_algo, _grid(args.baseline_grid, XSAOLA_GRID),
                             spec, settings, cfg.seed)
        baseline = pick_baseline(base_grid, cfg.classifier)
    res = fair_compare(goa, baseline, cfg.classifier)
    _write(out / "comparison.json", json.dumps(res.to_dict(timing=False), indent=2,
                                               sort_keys=True))
    _write(out / "grid_goa.json", json.dumps([r.to_dict(False) for r in goa], indent=2,
                                             sort_keys=True))
    if base_grid:
        _write(out / "grid_baseline.json", json.dumps([r.to_dict(False) for r in base_grid],
                                                      indent=2, sort_keys=True))
    _write(out / "timing.json", json.dumps(
        {"wall_ms": int(round((time.perf_counter() - t0) * 1000)),
         "goa_runtime_ms": [r.runtime_ms for r in goa],
         "baseline_runtime_ms": [r.runtime_ms for r in base_grid]}, indent=2))
    _manifest(cfg, ds, "compare", out,
              {"baseline": args.baseline, "baseline_algo": args.baseline_algo,
               "baseline_grid": args.baseline_grid})
    c, b = res.chosen_report, res.baseline_report
    print(f"{res.rule_applied}: GOA delta={res.chosen_delta:g} "
          f"({c.n_selected} features, {cfg.classifier}={c.accuracy(cfg.classifier):.4f}) vs "
          f"{b.algorithm} delta={b.delta:g} ({b.n_selected} features, "
          f"{cfg.classifier}={b.accuracy(cfg.classifier):.4f})")
    return 0


def _ids(text, n):
    if not text:
        return list(range(n))
    ids = [int(v) for v in text.split(",") if v.strip()]
    bad = [i for i in ids if not 0 <= i < n]
    if bad:
        raise ValueError(f"feature ids {bad} out of range 0..{n - 1}")
    return ids


def cmd_cache(args) -> int:
    cfg = _experiment(args)
    ds = _load(cfg)
    out = _output_dir(args, cfg)
    rows = np.arange(ds.n_samples) if ds.fixed_split is None else ds.fixed_split[0]
    seed = derive_seed(cfg.seed, "cache")
    cache = cgd_store(ds, seed).cache_for(rows, _ids(args.features, ds.n_features))
    cache.dump_csv(out / "cache.csv")
    print(f"wrote {len(cache)} pair estimates to {out / 'cache.csv'}")
    if args.dump_emst:
        pair = _ids(args.dump_emst, ds.n_features)
        if len(pair) != 2 or pair[0] == pair[1]:
            raise ValueError("--dump-emst expects two distinct feature ids, e.g. 0,3")
        lo, hi = sorted(pair)
        x, y = zscore(ds.values[rows, lo]), zscore(ds.values[rows, hi])
        pts, origin, cls = cgd_point_set(x, y, ds.labels[rows], pair_seed(seed, lo, hi))
        path = out / f"emst_{lo}_{hi}.csv"
        write_edges_csv(build_emst(pts), path)
        np.savetxt(out / f"emst_{lo}_{hi}_points.csv",
                   np.column_stack([pts, origin, cls]), delimiter=",",
                   header="x,y,origin,class", comments="", fmt=["%.17g", "%.17g", "%d", "%d"])
        print(f"wrote EMST edges to {path}")
    return 0


def cmd_report(args) -> int:
    paths = []
    for p in args.inputs:
        p = Path(p)
        if p.is_dir():
            paths.extend(q for q in p.rglob("*.json")
                         if q.name not in ("manifest.json", "timing.json", "comparison.json"))
        elif p.exists():
            paths.append(p)
        else:
            raise FileNotFoundError(f"{p}: no such file or directory")
    reports = load_reports(paths)
    if not reports:
        raise ValueError("no reports found")
    out = Path(args.out or os.environ.get(OUTPUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_table(reports, out / "table.csv")
    series = write_series(reports, args.x, out)
    print(f"wrote {out / 'table.csv'} and {len(series)} series files")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goa-osfs", description="Streaming feature selection with conditional "
        "geometric dependency, and an extended SAOLA baseline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a Gaussian-mixture dataset CSV")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--dims", type=int, default=10)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stream-run", help="one selector run with report, traces and manifest")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_stream_run)

    p = sub.add_parser("compare", help="GOA threshold grid against a baseline run")
    _add_experiment_args(p, algo=False)
    p.add_argument("--grid", help="comma-separated GOA thresholds")
    p.add_argument("--classifier", choices=["knn", "svm"])
    p.add_argument("--baseline", help="report.json of the baseline run")
    p.add_argument("--baseline-algo", type=str.upper, default="XSAOLA",
                   choices=["GOA", "XSAOLA"], help="grid-searched when --baseline is absent")
    p.add_argument("--baseline-grid", help="comma-separated baseline thresholds")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cache", help="dump pairwise CGD estimates")
    _add_experiment_args(p, algo=False)
    p.add_argument("--features", help="comma-separated feature ids (default: all)")
    p.add_argument("--dump-emst", metavar="A,B", help="also write the EMST of pair A,B")
    p.set_defaults(func=cmd_cache)

    p = sub.add_parser("report", help="aggregate report files into CSV tables")
    p.add_argument("inputs", nargs="+", help="report JSON files or directories")
    p.add_argument("--x", default="delta", help="series x column: report field or meta key")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"goa-osfs {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
