"""Datasets, CSV ingestion, class priors and trial splits."""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .seeding import derive_seed


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


def _frozen(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Real-valued sample matrix with dense integer class labels.

    ``values`` is stored column-major because every estimator consumes whole
    feature columns. ``label_values`` maps dense ids back to the labels found
    in the source file. When the data came as a train/test pair,
    ``fixed_split`` holds the (train_rows, test_rows) index arrays.
    """

    values: np.ndarray
    labels: np.ndarray
    class_count: int
    feature_names: Optional[tuple] = None
    label_values: Optional[tuple] = None
    fixed_split: Optional[tuple] = None
    name: str = "dataset"
    _fingerprint: str = field(default="", repr=False)

    def __post_init__(self):
        values = np.asfortranarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 2:
            raise DataError("values must be a 2-D matrix")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != values.shape[0]:
            raise DataError(
                f"labels length {labels.shape[0]} does not match {values.shape[0]} rows")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise DataError("labels must be integer class ids")
        labels = labels.astype(np.int64)
        m = int(self.class_count)
        if m < 1:
            raise DataError("class_count must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= m):
            raise DataError(f"labels must lie in [0, {m})")
        missing = sorted(set(range(m)) - set(np.unique(labels).tolist()))
        if missing:
            raise DataError(f"classes {missing} have no samples")
        if not np.all(np.isfinite(values)):
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {r}, column {c}")
        if self.feature_names is not None and len(self.feature_names) != values.shape[1]:
            raise DataError("feature_names length does not match column count")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "class_count", m)
        if self.fixed_split is not None:
            tr, te = (np.asarray(a, dtype=np.int64) for a in self.fixed_split)
            object.__setattr__(self, "fixed_split", (_frozen(tr), _frozen(te)))
        h = hashlib.blake2b(digest_size=16)
        h.update(np.ascontiguousarray(values).tobytes())
        h.update(labels.tobytes())
        object.__setattr__(self, "_fingerprint", h.hexdigest())

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def fingerprint(self) -> str:
        return self._fingerprint

    def column(self, j, rows=None) -> np.ndarray:
        col = self.values[:, j]
        return col if rows is None else col[rows]

    def subset(self, rows) -> "Dataset":
        """Dataset restricted to ``rows``; labels keep their ids."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.values[rows], self.labels[rows], self.class_count,
                       self.feature_names, self.label_values, name=self.name)


@dataclass(frozen=True)
class ClassPriors:
    p: tuple

    def __post_init__(self):
        if any(not (0.0 < v <= 1.0) for v in self.p):
            raise DataError("every prior must lie in (0, 1]")
        if abs(math.fsum(self.p) - 1.0) > 1e-12:
            raise DataError("priors must sum to 1")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=np.float64)


@dataclass(frozen=True)
class TrialSplit:
    train_rows: np.ndarray
    test_rows: np.ndarray
    seed: int


def class_priors(labels, class_count: Optional[int] = None) -> ClassPriors:
    """Plug-in priors ``n_i / n``; every class in ``[0, m)`` must be present."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise DataError("cannot compute priors of an empty label vector")
    m = int(labels.max()) + 1 if class_count is None else int(class_count)
    counts = np.bincount(labels, minlength=m)
    if counts.size > m:
        raise DataError(f"label {labels.max()} exceeds class_count {m}")
    absent = np.flatnonzero(counts == 0).tolist()
    if absent:
        raise DataError(f"classes {absent} absent from labels")
    n = int(labels.size)
    return ClassPriors(tuple(float(Fraction(int(c), n)) for c in counts))


def _parse_rows(path, label_column, has_header):
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = None
    if has_header:
        header, rows = [h.strip() for h in rows[0]], rows[1:]
    width = len(header) if header is not None else len(rows[0])
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None:
            raise DataError("label column given by name but the file has no header")
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found")
        li = header.index(label_column)
    else:
        li = int(label_column)
        if li < 0:
            li += width
        if not 0 <= li < width:
            raise DataError(f"{path}: label column index {label_column} out of range")
    raw_labels, values = [], []
    for r_i, row in enumerate(rows):
        line = r_i + (2 if has_header else 1)
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} cells, expected {width}")
        raw_labels.append(row[li].strip())
        vals = []
        for c_i, cell in enumerate(row):
            if c_i == li:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {line}, column {c_i}: cannot parse {cell!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {line}, column {c_i}: non-finite value {cell!r}")
            vals.append(v)
        values.append(vals)
    names = None
    if header is not None:
        names = tuple(h for i, h in enumerate(header) if i != li)
    return raw_labels, np.array(values, dtype=np.float64).reshape(len(rows), width - 1), names


def _dense_ids(raw_labels, label_values=None):
    mapping = {} if label_values is None else {v: i for i, v in enumerate(label_values)}
    ids = []
    for v in raw_labels:
        if v not in mapping:
            mapping[v] = len(mapping)
        ids.append(mapping[v])
    return np.array(ids, dtype=np.int64), tuple(mapping)


def load_csv(path, label_column=-1, has_header=True, name=None) -> Dataset:
    """Read a numeric CSV; labels are remapped to dense ids by first appearance."""
    raw, values, names = _parse_rows(path, label_column, has_header)
    labels, label_values = _dense_ids(raw)
    return Dataset(values, labels, len(label_values), names, label_values,
                   name=name or Path(path).stem)


def load_train_test(train_path, test_path, label_column=-1, has_header=True,
                    name=None) -> Dataset:
    """Load a published train/test pair as one dataset with a fixed split."""
    raw_tr, v_tr, names = _parse_rows(train_path, label_column, has_header)
    raw_te, v_te, names_te = _parse_rows(test_path, label_column, has_header)
    if v_tr.shape[1] != v_te.shape[1]:
        raise DataError("train and test files have different column counts")
    if names is not None and names_te is not None and names != names_te:
        raise DataError("train and test headers differ")
    labels, label_values = _dense_ids(raw_tr + raw_te)
    n_tr = len(raw_tr)
    train_ids = set(labels[:n_tr].tolist())
    if len(train_ids) != len(label_values):
        absent = [label_values[i] for i in range(len(label_values)) if i not in train_ids]
        raise DataError(f"classes {absent} have zero training samples")
    split = (np.arange(n_tr), np.arange(n_tr, n_tr + len(raw_te)))
    return Dataset(np.vstack([v_tr, v_te]), labels, len(label_values), names,
                   label_values, fixed_split=split,
                   name=name or Path(train_path).stem)


def write_csv(dataset: Dataset, path, label_column="label") -> None:
    """Write features then the original label values; floats round-trip exactly."""
    names = dataset.feature_names or tuple(f"f{j}" for j in range(dataset.n_features))
    lv = dataset.label_values or tuple(str(i) for i in range(dataset.class_count))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [label_column])
        for row, lab in zip(dataset.values, dataset.labels):
            w.writerow([repr(float(v)) for v in row] + [lv[lab]])


def make_trials(dataset: Dataset, n_trials: int = 5, train_fraction: float = 0.7,
                base_seed: int = 0) -> list:
    """Seeded random train/test splits, or the dataset's fixed split if it has one.

    Each trial permutes the row indices independently. If a permutation leaves
    a class out of the training part, the first test row of that class is
    swapped with the last training row of a class that can spare one, so
    every training set covers every class.
    """
    if dataset.fixed_split is not None:
        tr, te = dataset.fixed_split
        return [TrialSplit(np.array(tr), np.array(te), int(base_seed))]
    if n_trials < 1:
        raise DataError("n_trials must be >= 1")
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie strictly between 0 and 1")
    n, m = dataset.n_samples, dataset.class_count
    n_train = int(round(train_fraction * n))
    if n_train < m or n_train >= n:
        raise DataError(
            f"cannot cover {m} classes with {n_train} training rows out of {n}")
    splits = []
    for t in range(n_trials):
        seed = derive_seed(base_seed, "trial", t)
        perm = np.random.default_rng(seed).permutation(n)
        train, test = list(perm[:n_train]), list(perm[n_train:])
        labels = dataset.labels
        for c in range(m):
            if any(labels[r] == c for r in train):
                continue
            counts = np.bincount(labels[train], minlength=m)
            donor = next(i for i in range(len(train) - 1, -1, -1)
                         if counts[labels[train[i]]] >= 2)
            j = next(i for i, r in enumerate(test) if labels[r] == c)
            train[donor], test[j] = test[j], train[donor]
        splits.append(TrialSplit(np.array(train, dtype=np.int64),
                                 np.array(test, dtype=np.int64), seed))
    return splits


def select_columns(dataset: Dataset, columns: Sequence[int]) -> Dataset:
    """Dataset with only ``columns``, in the given order."""
    cols = list(columns)
    names = None if dataset.feature_names is None else tuple(dataset.feature_names[c] for c in cols)
    return Dataset(dataset.values[:, cols], dataset.labels, dataset.class_count, names,
                   dataset.label_values, dataset.fixed_split, dataset.name)
