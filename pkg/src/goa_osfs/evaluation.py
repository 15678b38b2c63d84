"""Trial protocol, threshold grids and the fair comparison against a baseline."""
from __future__ import annotations

import json
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .classifiers import accuracy, knn_classify, majority_classify, svm_classify
from .data import Dataset, make_trials
from .dependency import cgd_store
from .goa import GoaConfig, run_goa
from .seeding import derive_seed
from .streaming import ScenarioSpec, make_stream
from .xsaola import MiStore, XsaolaConfig, run_xsaola

ALGORITHMS = ("GOA", "XSAOLA")
GOA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))
XSAOLA_GRID = tuple(float(v) for v in np.logspace(-3, 0, 20))


@dataclass(frozen=True)
class EvalSettings:
    knn_k: int = 3
    svm_epochs: int = 50
    svm_lr: float = 0.1
    svm_reg: float = 1e-4
    n_trials: int = 5
    train_fraction: float = 0.7
    bins: Optional[int] = None


@dataclass
class RunReport:
    dataset: str
    algorithm: str
    scenario: str
    delta: float
    n_selected: int
    acc_knn: float
    acc_svm: float
    runtime_ms: int
    trial_seeds: list
    knn_k: int = 3
    n_selected_per_trial: list = field(default_factory=list)
    selected_per_trial: list = field(default_factory=list)
    acc_knn_per_trial: list = field(default_factory=list)
    acc_svm_per_trial: list = field(default_factory=list)
    majority_fallback: bool = False
    meta: dict = field(default_factory=dict)

    def accuracy(self, classifier: str = "knn") -> float:
        if classifier == "knn":
            return self.acc_knn
        if classifier == "svm":
            return self.acc_svm
        raise ValueError(f"unknown classifier {classifier!r}")

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("runtime_ms")
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        d.setdefault("runtime_ms", 0)
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class FairComparisonResult:
    chosen_delta: float
    chosen_report: RunReport
    baseline_report: RunReport
    rule_applied: str  # UnderBudgetBest | ClosestOverBudget
    classifier: str = "knn"

    def to_dict(self, timing: bool = True) -> dict:
        return {"chosen_delta": self.chosen_delta, "rule_applied": self.rule_applied,
                "classifier": self.classifier,
                "chosen_report": self.chosen_report.to_dict(timing),
                "baseline_report": self.baseline_report.to_dict(timing)}


def selected_count_mode(counts: Sequence[int]) -> int:
    """Most common per-trial count; ties go to the larger count."""
    c = Counter(counts)
    top = max(c.values())
    return max(k for k, v in c.items() if v == top)


def score_subset(dataset: Dataset, train, test, selected, settings: EvalSettings, seed: int):
    """(knn accuracy, svm accuracy, fallback flag) for one split and feature subset."""
    y_tr, y_te = dataset.labels[train], dataset.labels[test]
    if not selected:
        acc = accuracy(y_te, majority_classify(y_tr, len(test)))
        return acc, acc, True
    X = dataset.values[:, list(selected)]
    knn = accuracy(y_te, knn_classify(X[train], y_tr, X[test], settings.knn_k))
    svm = accuracy(y_te, svm_classify(X[train], y_tr, X[test], settings.svm_epochs,
                                      settings.svm_lr, settings.svm_reg, seed))
    return knn, svm, False


def _select(algorithm, stream, dataset, delta, seed, settings, store):
    if algorithm == "GOA":
        return run_goa(stream, dataset, GoaConfig(delta, seed), store)
    if algorithm == "XSAOLA":
        return run_xsaola(stream, dataset, XsaolaConfig(delta, settings.bins, seed), store)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def run_grid(dataset: Dataset, algorithm: str, deltas: Sequence[float], scenario: ScenarioSpec,
             settings: EvalSettings = EvalSettings(), seed: int = 0,
             keep_states: bool = False):
    """One RunReport per threshold; trials, streams and estimate caches are shared.

    Returns the reports, plus the final selector states per (delta, trial)
    when ``keep_states`` is set.
    """
    algorithm = algorithm.upper()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    trials = make_trials(dataset, settings.n_trials, settings.train_fraction,
                         derive_seed(seed, "trials"))
    per_delta = {d: {"sel": [], "knn": [], "svm": [], "fb": False, "ms": 0.0} for d in deltas}
    states = {}
    for ti, split in enumerate(trials):
        spec = replace(scenario, seed=derive_seed(seed, "stream", ti))
        try:
            stream = make_stream(dataset, spec, split.train_rows)
        except ValueError as e:
            raise type(e)(f"trial {ti}: {e}") from e
        sel_seed = derive_seed(seed, "selector", ti)
        svm_seed = derive_seed(seed, "svm", ti)
        store = cgd_store(dataset, sel_seed) if algorithm == "GOA" else MiStore(dataset, settings.bins)
        scored = {}
        for d in deltas:
            t0 = time.perf_counter()
            state = _select(algorithm, stream, dataset, d, sel_seed, settings, store)
            key = tuple(state.selected)
            if key not in scored:
                scored[key] = score_subset(dataset, split.train_rows, split.test_rows, key,
                                           settings, svm_seed)
            knn, svm, fb = scored[key]
            acc = per_delta[d]
            acc["ms"] += (time.perf_counter() - t0) * 1000.0
            acc["sel"].append(list(key))
            acc["knn"].append(knn)
            acc["svm"].append(svm)
            acc["fb"] = acc["fb"] or fb
            if keep_states:
                states[(d, ti)] = state
    reports = []
    for d in deltas:
        acc = per_delta[d]
        counts = [len(s) for s in acc["sel"]]
        reports.append(RunReport(
            dataset=dataset.name, algorithm=algorithm, scenario=scenario.kind,
            delta=float(d), n_selected=selected_count_mode(counts),
            acc_knn=float(np.mean(acc["knn"])), acc_svm=float(np.mean(acc["svm"])),
            runtime_ms=int(round(acc["ms"])), trial_seeds=[int(t.seed) for t in trials],
            knn_k=settings.knn_k, n_selected_per_trial=counts,
            selected_per_trial=acc["sel"], acc_knn_per_trial=acc["knn"],
            acc_svm_per_trial=acc["svm"], majority_fallback=acc["fb"]))
    if keep_states:
        return reports, states
    return reports


def run_trials(dataset: Dataset, algorithm: str, delta: float, scenario: ScenarioSpec,
               settings: EvalSettings = EvalSettings(), seed: int = 0) -> RunReport:
    return run_grid(dataset, algorithm, [delta], scenario, settings, seed)[0]


def fair_compare(candidates: Sequence[RunReport], baseline: RunReport,
                 classifier: str = "knn") -> FairComparisonResult:
    """Best-accuracy candidate using no more features than the baseline.

    If every candidate uses more, the one with the fewest features wins
    whatever its accuracy. Accuracy ties go to fewer features, then to the
    smaller threshold.
    """
    if not candidates:
        raise ValueError("no candidate runs to choose from")
    under = [c for c in candidates if c.n_selected <= baseline.n_selected]
    if under:
        chosen = min(under, key=lambda c: (-c.accuracy(classifier), c.n_selected, c.delta))
        rule = "UnderBudgetBest"
    else:
        fewest = min(c.n_selected for c in candidates)
        chosen = min((c for c in candidates if c.n_selected == fewest),
                     key=lambda c: (-c.accuracy(classifier), c.delta))
        rule = "ClosestOverBudget"
    return FairComparisonResult(chosen.delta, chosen, baseline, rule, classifier)


def pick_baseline(reports: Sequence[RunReport], classifier: str = "knn") -> RunReport:
    """Best-accuracy run of a baseline's own threshold grid."""
    if not reports:
        raise ValueError("no baseline runs to choose from")
    return min(reports, key=lambda r: (-r.accuracy(classifier), r.n_selected, r.delta))
