"""Selector state and decision trace shared by GOA and extended SAOLA."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .dependency import DependencyCache


class StepError(ValueError):
    pass


@dataclass
class TraceEntry:
    t: int
    feature: int
    decision: str  # accept | discard | prune
    witness: list = field(default_factory=list)
    estimates: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"t": self.t, "feature": self.feature, "decision": self.decision,
                           "witness": self.witness, "estimates": self.estimates})


def est_key(*ids) -> str:
    return ",".join(str(i) for i in ids)


@dataclass
class SelectorState:
    selected: list = field(default_factory=list)
    best_block: dict = field(default_factory=dict)
    best_score: dict = field(default_factory=dict)
    cache: Optional[DependencyCache] = None
    trace: list = field(default_factory=list)
    seen: set = field(default_factory=set)

    def log(self, entry: TraceEntry) -> None:
        self.trace.append(entry)

    def write_trace(self, path) -> None:
        with Path(path).open("w") as fh:
            for e in self.trace:
                fh.write(e.to_json() + "\n")


def check_window(dataset, window, minimum: int = 2) -> np.ndarray:
    window = np.asarray(window, dtype=np.int64)
    if window.size == 0:
        raise StepError("empty sample window")
    if window.min() < 0 or window.max() >= dataset.n_samples:
        raise StepError("window rows out of range")
    counts = np.bincount(dataset.labels[window], minlength=dataset.class_count)
    short = np.flatnonzero(counts < minimum).tolist()
    if short:
        raise StepError(
            f"window lacks {minimum} samples of classes {short} (counts {counts.tolist()})")
    return window


def check_feature(dataset, f: int) -> None:
    if not 0 <= f < dataset.n_features:
        raise StepError(f"unknown feature id {f}")
