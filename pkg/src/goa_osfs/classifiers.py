"""KNN and one-vs-rest linear SVM used to score selected feature subsets.

Both scale features to [0, 1] with minima and maxima taken from the
training rows only.
"""
from __future__ import annotations

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist


class MinMaxScaler:
    def fit(self, X):
        X = np.asarray(X, dtype=np.float64)
        self.lo = X.min(axis=0)
        span = X.max(axis=0) - self.lo
        span[span == 0] = 1.0
        self.span = span
        return self

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.lo) / self.span


def _check(X_train, y_train, X_test):
    X_train = np.asarray(X_train, dtype=np.float64)
    X_test = np.asarray(X_test, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    if X_train.ndim != 2 or X_test.ndim != 2:
        raise ValueError("feature matrices must be 2-D")
    if X_train.shape[0] == 0:
        raise ValueError("empty training set")
    if X_train.shape[1] == 0:
        raise ValueError("no features selected")
    if X_train.shape[1] != X_test.shape[1]:
        raise ValueError("train and test feature subsets differ")
    if y_train.shape[0] != X_train.shape[0]:
        raise ValueError("labels do not match training rows")
    return X_train, y_train, X_test


def knn_classify(X_train, y_train, X_test, k: int = 3, scale: bool = True,
                 chunk: int = 512) -> np.ndarray:
    """Majority vote of the k nearest training rows (Euclidean).

    Neighbours at equal distance are taken in training-row order. A tied
    vote goes to the class with the smallest summed neighbour distance, then
    to the smallest class id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    X_train, y_train, X_test = _check(X_train, y_train, X_test)
    if scale:
        sc = MinMaxScaler().fit(X_train)
        X_train, X_test = sc.transform(X_train), sc.transform(X_test)
    k = min(k, X_train.shape[0])
    m = int(y_train.max()) + 1
    out = np.empty(X_test.shape[0], dtype=np.int64)
    for s in range(0, X_test.shape[0], chunk):
        D = cdist(X_test[s:s + chunk], X_train)
        nn = np.argsort(D, axis=1, kind="stable")[:, :k]
        dist = np.take_along_axis(D, nn, axis=1)
        lab = y_train[nn]
        votes = np.zeros((nn.shape[0], m))
        dsum = np.zeros((nn.shape[0], m))
        rows = np.repeat(np.arange(nn.shape[0]), k)
        np.add.at(votes, (rows, lab.ravel()), 1.0)
        np.add.at(dsum, (rows, lab.ravel()), dist.ravel())
        top = votes == votes.max(axis=1, keepdims=True)
        # among tied classes pick smallest summed distance; argmin keeps the smallest id
        out[s:s + chunk] = np.argmin(np.where(top, dsum, np.inf), axis=1)
    return out


@njit(cache=True)
def _sgd_ovr(X, Y, order, reg, lr):
    n, d = X.shape
    m = Y.shape[1]
    W = np.zeros((m, d))
    t = 0
    for e in range(order.shape[0]):
        for ii in range(n):
            i = order[e, ii]
            t += 1
            eta = lr / (reg * t)
            shrink = 1.0 - eta * reg
            for c in range(m):
                s = 0.0
                for j in range(d):
                    s += W[c, j] * X[i, j]
                hit = Y[i, c] * s < 1.0
                for j in range(d):
                    W[c, j] *= shrink
                    if hit:
                        W[c, j] += eta * Y[i, c] * X[i, j]
    return W


def svm_fit(X_train, y_train, epochs: int = 50, learning_rate: float = 0.1,
            reg: float = 1e-4, seed: int = 0):
    """One-vs-rest hinge-loss weights (last column is the bias).

    Stochastic subgradient descent with step ``learning_rate / (reg * t)``.
    """
    if epochs < 1 or learning_rate <= 0 or reg <= 0:
        raise ValueError("epochs, learning_rate and reg must be positive")
    X = np.asarray(X_train, dtype=np.float64)
    y = np.asarray(y_train, dtype=np.int64)
    m = int(y.max()) + 1
    Xb = np.ascontiguousarray(np.column_stack([X, np.ones(X.shape[0])]))
    Y = np.where(y[:, None] == np.arange(m)[None, :], 1.0, -1.0)
    rng = np.random.default_rng(seed)
    order = np.stack([rng.permutation(X.shape[0]) for _ in range(epochs)])
    return _sgd_ovr(Xb, Y, order, reg, learning_rate)


def svm_classify(X_train, y_train, X_test, epochs: int = 50, learning_rate: float = 0.1,
                 reg: float = 1e-4, seed: int = 0, scale: bool = True) -> np.ndarray:
    X_train, y_train, X_test = _check(X_train, y_train, X_test)
    present = np.unique(y_train)
    if present.size == 1:
        return np.full(X_test.shape[0], present[0], dtype=np.int64)
    if scale:
        sc = MinMaxScaler().fit(X_train)
        X_train, X_test = sc.transform(X_train), sc.transform(X_test)
    W = svm_fit(X_train, y_train, epochs, learning_rate, reg, seed)
    scores = np.column_stack([X_test, np.ones(X_test.shape[0])]) @ W.T
    absent = np.setdiff1d(np.arange(W.shape[0]), present)
    scores[:, absent] = -np.inf
    return np.argmax(scores, axis=1)


def majority_classify(y_train, n_test: int) -> np.ndarray:
    counts = np.bincount(np.asarray(y_train, dtype=np.int64))
    return np.full(n_test, int(np.argmax(counts)), dtype=np.int64)


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    if y_true.size == 0:
        raise ValueError("empty label vector")
    return float(np.mean(y_true == np.asarray(y_pred)))
