"""Streaming scenarios A, B1, B2, B3 and the Gaussian simulation generator.

Scenario A streams one feature per step over every row. The B scenarios
partition the rows into disjoint windows, one per event: B1 with equal
window sizes, B2 with random sizes, and B3 with each feature repeated over
several consecutive events.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import Dataset
from .seeding import rng_for

SCENARIOS = ("A", "B1", "B2", "B3")


class InfeasibleStream(ValueError):
    """The rows cannot be split into windows that cover every class."""


@dataclass(frozen=True)
class StreamEvent:
    t: int
    feature_id: int
    window: np.ndarray


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str = "A"
    seed: int = 0
    b3_spans: int = 2
    b2_min_fraction: float = 0.5
    min_per_class: int = 3
    shuffle_features: Optional[int] = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.kind!r}; expected one of {SCENARIOS}")
        object.__setattr__(self, "kind", kind)
        if kind == "B3" and self.b3_spans < 2:
            raise ValueError("scenario B3 needs b3_spans >= 2")
        if kind == "B2" and not 0.0 < self.b2_min_fraction < 1.0:
            raise ValueError("b2_min_fraction must lie in (0, 1)")
        if self.min_per_class < 2:
            raise ValueError("min_per_class must be >= 2")


def feature_order(n_features: int, spec: ScenarioSpec) -> list:
    order = list(range(n_features))
    if spec.shuffle_features is not None:
        order = rng_for(spec.shuffle_features, "feature-order").permutation(n_features).tolist()
    return order


def _deal(items, weights, sizes_out):
    """Smooth weighted round-robin: item k goes to the window with most credit."""
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    credit = np.zeros_like(w)
    for item in items:
        credit += w
        j = int(np.argmax(credit))
        credit[j] -= total
        sizes_out[j].append(item)


def partition_rows(labels, rows, n_windows: int, class_count: int, spec: ScenarioSpec,
                   weights=None) -> list:
    """Split ``rows`` into ``n_windows`` disjoint windows, each covering every class.

    Each window first receives ``min_per_class`` rows of every class; the
    remaining rows, grouped by class, are dealt in proportion to ``weights``.
    """
    rows = np.asarray(rows, dtype=np.int64)
    k = spec.min_per_class
    rng = rng_for(spec.seed, "stream-rows", spec.kind)
    perm = rows[rng.permutation(rows.size)]
    by_class = [perm[labels[perm] == c] for c in range(class_count)]
    for c, members in enumerate(by_class):
        if members.size < k * n_windows:
            raise InfeasibleStream(
                f"scenario {spec.kind}: {n_windows} windows need {k * n_windows} rows of "
                f"class {c} ({k} per window) but only {members.size} are available "
                f"({rows.size} rows / {n_windows} windows = {rows.size / n_windows:.2f} per window)")
    windows = [[] for _ in range(n_windows)]
    for members in by_class:
        for w in range(n_windows):
            windows[w].extend(members[w * k:(w + 1) * k].tolist())
    leftover = [r for members in by_class for r in members[k * n_windows:].tolist()]
    _deal(leftover, np.ones(n_windows) if weights is None else weights, windows)
    return [np.sort(np.array(w, dtype=np.int64)) for w in windows]


def make_stream(dataset: Dataset, spec: ScenarioSpec, rows: Optional[Sequence[int]] = None) -> list:
    """Events for ``spec`` over ``rows`` (the training rows; default all rows)."""
    rows = np.arange(dataset.n_samples) if rows is None else np.asarray(rows, dtype=np.int64)
    order = feature_order(dataset.n_features, spec)
    if spec.kind == "A":
        window = np.sort(rows)
        return [StreamEvent(t, f, window) for t, f in enumerate(order)]
    n_feat = len(order)
    if spec.kind == "B3":
        n_windows = n_feat * spec.b3_spans
    else:
        n_windows = n_feat
    weights = None
    if spec.kind == "B2":
        lo = spec.b2_min_fraction
        weights = rng_for(spec.seed, "b2-sizes").uniform(lo, 2.0 - lo, n_windows)
    windows = partition_rows(dataset.labels, rows, n_windows, dataset.class_count, spec, weights)
    if spec.kind == "B3":
        feats = [f for f in order for _ in range(spec.b3_spans)]
    else:
        feats = order
    return [StreamEvent(t, f, w) for t, (f, w) in enumerate(zip(feats, windows))]


@dataclass(frozen=True)
class GaussianModel:
    means: np.ndarray
    cov: np.ndarray


def gaussian_model(m: int, d: int, seed: int) -> GaussianModel:
    """Class means on the radius-2 sphere and one shared random covariance."""
    rng = rng_for(seed, "sim-model")
    z = rng.standard_normal((m, d))
    means = 2.0 * z / np.linalg.norm(z, axis=1, keepdims=True)
    a = rng.standard_normal((d, d))
    cov = a @ a.T / d + 0.1 * np.eye(d)
    return GaussianModel(means, cov)


def gen_gaussian_simulation(m: int, d: int, n_per_class: int, seed: int = 0,
                            model: Optional[GaussianModel] = None) -> Dataset:
    if m < 2 or d < 2 or n_per_class < 4:
        raise ValueError("need m >= 2 classes, d >= 2 dims and n_per_class >= 4")
    model = model or gaussian_model(m, d, seed)
    rng = rng_for(seed, "sim-draws", n_per_class)
    chol = np.linalg.cholesky(model.cov)
    blocks = [model.means[c] + rng.standard_normal((n_per_class, d)) @ chol.T
              for c in range(m)]
    labels = np.repeat(np.arange(m), n_per_class)
    return Dataset(np.vstack(blocks), labels, m, tuple(f"f{j}" for j in range(d)),
                   tuple(str(c) for c in range(m)), name=f"sim_m{m}_d{d}_n{n_per_class}")
