"""Aggregate RunReport files into table and plot-series CSVs."""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

from .evaluation import RunReport

TABLE_COLUMNS = ["dataset", "algorithm", "scenario", "delta", "n_selected",
                 "acc_knn", "acc_svm", "knn_k", "majority_fallback"]


def load_reports(paths) -> list:
    """RunReports from JSON files holding one report, a list, or a comparison result."""
    out = []
    for p in sorted(str(p) for p in paths):
        d = json.loads(Path(p).read_text())
        if isinstance(d, list):
            out.extend(RunReport.from_dict(x) for x in d)
        elif "chosen_report" in d:
            out.append(RunReport.from_dict(d["chosen_report"]))
            out.append(RunReport.from_dict(d["baseline_report"]))
        else:
            out.append(RunReport.from_dict(d))
    return out


def _x_value(report: RunReport, key: str):
    if key in report.meta:
        return report.meta[key]
    return getattr(report, key)


def write_table(reports, path) -> None:
    meta_keys = sorted({k for r in reports for k in r.meta})
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_COLUMNS + meta_keys)
        for r in reports:
            w.writerow([repr(getattr(r, c)) if isinstance(getattr(r, c), float)
                        else getattr(r, c) for c in TABLE_COLUMNS]
                       + [r.meta.get(k, "") for k in meta_keys])


def write_series(reports, x_key: str, out_dir) -> list:
    """One CSV per (dataset, algorithm, scenario) with x, accuracies and feature counts.

    Rows are sorted by x so the files plot directly as accuracy-vs-setting
    curves.
    """
    groups = defaultdict(list)
    for r in reports:
        groups[(r.dataset, r.algorithm, r.scenario)].append(r)
    written = []
    for (ds, algo, sc), rs in sorted(groups.items()):
        path = Path(out_dir) / f"series_{ds}_{algo}_{sc}.csv"
        rows = sorted(((_x_value(r, x_key), r) for r in rs), key=lambda t: t[0])
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([x_key, "acc_knn", "acc_svm", "n_selected"])
            for x, r in rows:
                w.writerow([x, repr(r.acc_knn), repr(r.acc_svm), r.n_selected])
        written.append(path)
    return written
