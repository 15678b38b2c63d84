"""Exact Euclidean minimum spanning trees in the plane and cross-edge counts.

The tree is built with dense Prim, O(N^2) time and O(N) memory. Edges are
ordered by (squared length, min endpoint, max endpoint), a strict total order,
so the tree is unique even with duplicate points or equal distances. Squared
lengths order edges the same way as lengths, so the tree is an EMST; stored
weights are the true Euclidean lengths.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

ORIGINAL = 0
PERMUTED = 1


@dataclass(frozen=True)
class Emst:
    a: np.ndarray
    b: np.ndarray
    weight: np.ndarray

    @property
    def n_points(self) -> int:
        return self.a.size + 1

    @property
    def total_weight(self) -> float:
        # fsum is exactly rounded, so the total does not depend on edge order
        return math.fsum(self.weight.tolist())

    def edges(self):
        return [(int(min(i, j)), int(max(i, j)), float(w))
                for i, j, w in zip(self.a, self.b, self.weight)]


@njit(cache=True, nogil=True)
def _before(w1, i1, j1, w2, i2, j2):
    # (w, lo, hi) lexicographic comparison of two edges
    if w1 != w2:
        return w1 < w2
    lo1, hi1 = min(i1, j1), max(i1, j1)
    lo2, hi2 = min(i2, j2), max(i2, j2)
    if lo1 != lo2:
        return lo1 < lo2
    return hi1 < hi2


@njit(cache=True, nogil=True)
def _prim(xs, ys):
    n = xs.shape[0]
    # vertices not yet in the tree, stored compactly with coordinates, squared
    # key distance and parent so the inner loop reads contiguous memory
    rv = np.arange(1, n, dtype=np.int64)
    rx = xs[1:].copy()
    ry = ys[1:].copy()
    rk = np.full(n - 1, np.inf)
    rp = np.full(n - 1, -1, dtype=np.int64)
    r = n - 1
    ea = np.empty(n - 1, dtype=np.int64)
    eb = np.empty(n - 1, dtype=np.int64)
    ew = np.empty(n - 1, dtype=np.float64)
    cur = 0
    cx = xs[0]
    cy = ys[0]
    for k in range(n - 1):
        best = -1
        bk = np.inf
        for pos in range(r):
            dx = rx[pos] - cx
            dy = ry[pos] - cy
            d = dx * dx + dy * dy
            kp = rk[pos]
            if d < kp or (d == kp and _before(d, cur, rv[pos], kp, rp[pos], rv[pos])):
                rk[pos] = d
                rp[pos] = cur
                kp = d
            if best < 0 or kp < bk or (
                    kp == bk and _before(kp, rp[pos], rv[pos], bk, rp[best], rv[best])):
                best = pos
                bk = kp
        ea[k] = rp[best]
        eb[k] = rv[best]
        ew[k] = math.sqrt(rk[best])
        cur = rv[best]
        cx = rx[best]
        cy = ry[best]
        last = r - 1
        rv[best] = rv[last]
        rx[best] = rx[last]
        ry[best] = ry[last]
        rk[best] = rk[last]
        rp[best] = rp[last]
        r -= 1
    return ea, eb, ew


def build_emst(points, tie_seed: int = 0, jitter: float = 0.0) -> Emst:
    """Euclidean MST of an (N, 2) point array.

    ``jitter`` > 0 perturbs coordinates by uniform noise of that relative
    magnitude (seeded by ``tie_seed``) before building, for sensitivity
    studies of tie resolution. The default leaves points untouched.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (N, 2)")
    if pts.shape[0] < 2:
        raise ValueError("an EMST needs at least 2 points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    if jitter > 0:
        scale = np.ptp(pts, axis=0)
        scale[scale == 0] = 1.0
        rng = np.random.default_rng(tie_seed)
        pts = pts + rng.uniform(-jitter, jitter, pts.shape) * scale
    xs = np.ascontiguousarray(pts[:, 0])
    ys = np.ascontiguousarray(pts[:, 1])
    a, b, w = _prim(xs, ys)
    return Emst(a, b, w)


def cross_counts(emst: Emst, origin, class_id, m: int) -> np.ndarray:
    """m x m matrix; entry [i, j] counts edges joining Original class i to Permuted class j.

    Edges between two points of the same origin are not counted.
    """
    origin = np.asarray(origin)
    class_id = np.asarray(class_id, dtype=np.int64)
    if origin.shape[0] != emst.n_points or class_id.shape[0] != emst.n_points:
        raise ValueError(
            f"tags cover {origin.shape[0]} points but the tree spans {emst.n_points}")
    if class_id.size and (class_id.min() < 0 or class_id.max() >= m):
        raise ValueError(f"class ids must lie in [0, {m})")
    oa, ob = origin[emst.a], origin[emst.b]
    cross = oa != ob
    a, b = emst.a[cross], emst.b[cross]
    a_is_orig = origin[a] == ORIGINAL
    orig_pt = np.where(a_is_orig, a, b)
    perm_pt = np.where(a_is_orig, b, a)
    r = np.zeros((m, m), dtype=np.int64)
    np.add.at(r, (class_id[orig_pt], class_id[perm_pt]), 1)
    return r


def write_edges_csv(emst: Emst, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "weight"])
        for a, b, wt in emst.edges():
            w.writerow([a, b, repr(wt)])
