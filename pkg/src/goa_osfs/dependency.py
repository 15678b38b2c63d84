"""Pairwise dependency estimators and their per-window caches.

``estimate_cgd`` is the class-conditional geometric dependency between two
features: the Henze-Penrose divergence between the joint density f(x, y) and
the class-wise product mixture pi(x, y) = sum_i p_i f(x|i) f(y|i). It is
estimated with one global Euclidean MST over the observed pairs and a copy in
which y is permuted within each class, counting tree edges that join the two
copies (the Friedman-Rafsky statistic).

``estimate_mi_hist`` is the plug-in histogram mutual information used by the
extended SAOLA baseline.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from .data import ClassPriors, Dataset, class_priors
from .emst import ORIGINAL, PERMUTED, build_emst, cross_counts
from .seeding import derive_seed


class DependencyError(ValueError):
    pass


def zscore(v):
    v = v - v.mean()
    sd = v.std()
    return v / sd if sd > 0 else v


def permuted_copy(y, labels, rng):
    """y with its values shuffled independently inside each class."""
    out = np.empty_like(y)
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        out[idx] = y[idx[rng.permutation(idx.size)]]
    return out


def cgd_point_set(x, y, labels, seed):
    """Observed pairs followed by the within-class permuted pairs, with tags."""
    rng = np.random.default_rng(seed)
    yp = permuted_copy(y, labels, rng)
    pts = np.column_stack([np.concatenate([x, x]), np.concatenate([y, yp])])
    n = x.size
    origin = np.r_[np.full(n, ORIGINAL), np.full(n, PERMUTED)]
    cls = np.concatenate([labels, labels])
    return pts, origin, cls


def estimate_cgd(x, y, labels, priors: Optional[ClassPriors] = None, seed: int = 0,
                 standardize: bool = True) -> float:
    """Conditional geometric dependency of x and y given the class, in [0, 1].

    0 means x and y are conditionally independent given the class; values
    near 1 mean the joint sample is far from the class-wise product of its
    marginals (e.g. duplicated features). With ``standardize`` each column is
    z-scored first; the population value is unchanged by per-coordinate
    affine maps, but the MST is not, so features on different scales would
    otherwise be dominated by the wider one.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = x.size
    if n == 0:
        raise DependencyError("empty input")
    if y.size != n or labels.size != n:
        raise DependencyError(f"length mismatch: x={n}, y={y.size}, labels={labels.size}")
    if priors is None:
        priors = class_priors(labels)
    p = priors.as_array()
    m = p.size
    counts = np.bincount(labels, minlength=m)
    if counts.size > m:
        raise DependencyError(f"label {labels.max()} outside the {m} prior classes")
    if np.any(counts < 2):
        raise DependencyError(
            f"every class needs at least 2 samples, got counts {counts.tolist()}")
    if standardize:
        x, y = zscore(x), zscore(y)
    pts, origin, cls = cgd_point_set(x, y, labels, seed)
    r = cross_counts(build_emst(pts), origin, cls, m)
    # r[i, j] / (2n) estimates p_i p_j eta_ij, so eta_ij ~ r[i, j] n / (2 n_i n_j)
    eta = r * n / (2.0 * np.outer(counts, counts))
    g = 1.0 - 2.0 * float(np.sum(np.outer(p, p) * eta))
    return min(max(g, 0.0), 1.0)


def default_bins(n: int) -> int:
    return int(max(2, min(32, math.ceil(math.sqrt(n)))))


def _entropy_terms(joint):
    pxy = joint / joint.sum()
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    return float(np.sum(pxy[nz] * np.log(pxy[nz] / (px @ py)[nz])))


def _bin_index(v, bins):
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return np.zeros(v.size, dtype=np.int64)
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(np.int64)
    return np.minimum(idx, bins - 1)


def estimate_mi_hist(x, z, bins: Optional[int] = None, discrete_z: bool = False) -> float:
    """Plug-in mutual information (nats) from an equal-width histogram.

    With ``discrete_z`` the second argument is a vector of class ids and is
    tabulated directly; otherwise both variables get ``bins`` equal-width bins
    over their observed range.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z)
    if x.size != z.size:
        raise DependencyError(f"length mismatch: {x.size} vs {z.size}")
    if x.size == 0:
        raise DependencyError("empty input")
    if bins is None:
        bins = default_bins(x.size)
    if bins < 2:
        raise DependencyError("bins must be >= 2")
    xi = _bin_index(x, bins)
    if discrete_z:
        zi = np.unique(np.asarray(z, dtype=np.int64), return_inverse=True)[1].ravel()
        nz = int(zi.max()) + 1
    else:
        zi = _bin_index(np.asarray(z, dtype=np.float64), bins)
        nz = bins
    joint = np.zeros((bins, nz))
    np.add.at(joint, (xi, zi), 1.0)
    return max(_entropy_terms(joint), 0.0)


def window_fingerprint(dataset: Dataset, window) -> str:
    h = hashlib.blake2b(digest_size=12)
    h.update(dataset.fingerprint.encode())
    h.update(np.asarray(window, dtype=np.int64).tobytes())
    return h.hexdigest()


def _key(a, b):
    return (a, b) if a <= b else (b, a)


class DependencyCache:
    """Frozen symmetric table of pairwise values computed on one sample window."""

    def __init__(self, table: dict, fingerprint: str):
        self._table = {_key(a, b): float(v) for (a, b), v in table.items() if a != b}
        self.fingerprint = fingerprint

    def __getitem__(self, pair) -> float:
        a, b = pair
        if a == b:
            raise KeyError(f"no self-pair entry for feature {a}")
        return self._table[_key(a, b)]

    def get(self, a, b) -> float:
        return self[a, b]

    def __contains__(self, pair) -> bool:
        return _key(*pair) in self._table

    def __len__(self) -> int:
        return len(self._table)

    def items(self):
        return sorted(self._table.items())

    def restrict(self, feature_ids) -> "DependencyCache":
        ids = set(feature_ids)
        return DependencyCache({k: v for k, v in self._table.items()
                                if k[0] in ids and k[1] in ids}, self.fingerprint)

    def __eq__(self, other):
        return (isinstance(other, DependencyCache) and self.fingerprint == other.fingerprint
                and self._table == other._table)

    def dump_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            fh.write(f"# fingerprint={self.fingerprint}\n")
            w = csv.writer(fh)
            w.writerow(["feature_a", "feature_b", "value"])
            for (a, b), v in self.items():
                w.writerow([a, b, repr(v)])

    @classmethod
    def load_csv(cls, path, fingerprint: Optional[str] = None) -> "DependencyCache":
        with Path(path).open(newline="") as fh:
            first = fh.readline().strip()
            if not first.startswith("# fingerprint="):
                raise DependencyError(f"{path}: missing fingerprint line")
            fp = first.split("=", 1)[1]
            if fingerprint is not None and fp != fingerprint:
                raise DependencyError(
                    f"{path}: fingerprint {fp} does not match expected {fingerprint}")
            reader = csv.DictReader(fh)
            table = {(int(r["feature_a"]), int(r["feature_b"])): float(r["value"])
                     for r in reader}
        return cls(table, fp)


def pair_seed(seed: int, a: int, b: int) -> int:
    lo, hi = _key(a, b)
    return derive_seed(seed, "cgd-pair", lo, hi)


def cgd_pair(dataset: Dataset, window, a: int, b: int, seed: int) -> float:
    """CGD of columns a and b on the rows in ``window``; symmetric in (a, b)."""
    lo, hi = _key(a, b)
    rows = np.asarray(window, dtype=np.int64)
    labels = dataset.labels[rows]
    priors = class_priors(labels, dataset.class_count)
    try:
        return estimate_cgd(dataset.values[rows, lo], dataset.values[rows, hi], labels,
                            priors, pair_seed(seed, lo, hi))
    except ValueError as e:
        raise DependencyError(f"pair ({lo}, {hi}): {e}") from e


class PairStore:
    """Memo of pairwise values keyed by (window fingerprint, pair).

    Shared across selector steps and across threshold settings on the same
    trial, so each pair is estimated at most once per window.
    """

    def __init__(self, dataset: Dataset, pair_fn: Callable, seed: int = 0):
        self.dataset = dataset
        self.pair_fn = pair_fn
        self.seed = seed
        self._memo = {}
        self.evaluations = 0

    def value(self, window, fp, a, b) -> float:
        k = (fp, *_key(a, b))
        if k not in self._memo:
            self._memo[k] = self.pair_fn(self.dataset, window, a, b, self.seed)
            self.evaluations += 1
        return self._memo[k]

    def cache_for(self, window, feature_ids: Iterable[int]) -> DependencyCache:
        fp = window_fingerprint(self.dataset, window)
        ids = list(dict.fromkeys(feature_ids))
        for f in ids:
            if not 0 <= f < self.dataset.n_features:
                raise DependencyError(f"unknown feature id {f}")
        table = {}
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                table[(a, b)] = self.value(window, fp, a, b)
        return DependencyCache(table, fp)


def cgd_store(dataset: Dataset, seed: int = 0) -> PairStore:
    return PairStore(dataset, cgd_pair, seed)


def precompute_cache(window, feature_ids, dataset: Dataset, seed: int = 0) -> DependencyCache:
    """CGD for every unordered pair of ``feature_ids`` on ``window``."""
    return cgd_store(dataset, seed).cache_for(window, feature_ids)
