"""Discrete label readout from embeddings, and clustering evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CTooLarge, DimensionMismatch, LengthMismatch, MethodRequiresSquare, NonFinite

ASSIGN_METHODS = ("argmax_g", "kmeans_f")


@dataclass(frozen=True)
class KMeansModel:
    centroids: np.ndarray
    inertia: float
    seed: int
    history: tuple = field(default=(), compare=False)

    def predict(self, X) -> np.ndarray:
        return _nearest(np.asarray(X, dtype=np.float64), self.centroids)[0]


def _sq_dists(X, C):
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _nearest(X, C):
    d = _sq_dists(X, C)
    lab = np.argmin(d, axis=1)
    return lab, d[np.arange(X.shape[0]), lab]


def _plusplus(X, c, rng):
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    closest = _sq_dists(X, X[idx])[:, 0]
    for _ in range(1, c):
        total = closest.sum()
        if total > 0.0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            remaining = np.setdiff1d(np.arange(n), idx)
            nxt = int(rng.choice(remaining))
        idx.append(nxt)
        closest = np.minimum(closest, _sq_dists(X, X[[nxt]])[:, 0])
    return X[idx].copy()


def _lloyd(X, C, max_iter):
    c = C.shape[0]
    lab, d = _nearest(X, C)
    history = [float(d.sum())]
    for _ in range(max_iter):
        newC = np.empty_like(C)
        counts = np.bincount(lab, minlength=c)
        for k in range(c):
            if counts[k] == 0:
                # empty cluster takes over the worst-served point
                far = int(np.argmax(d))
                lab[far] = k
                d[far] = 0.0
                counts = np.bincount(lab, minlength=c)
        for k in range(c):
            newC[k] = X[lab == k].mean(axis=0)
        new_lab, d = _nearest(X, newC)
        C = newC
        history.append(float(d.sum()))
        if np.array_equal(new_lab, lab):
            lab = new_lab
            break
        lab = new_lab
    return lab, C, float(d.sum()), history


def kmeans(F, c: int, seed: int = 0, restarts: int = 10, max_iter: int = 300):
    """Lloyd's algorithm with k-means++ seeding; best of ``restarts`` by inertia.

    Restart ``r`` is seeded with ``seed + r``; ties in inertia go to the
    earliest restart.

    Returns
    -------
    labels : ndarray of int, shape (n,)
    model : KMeansModel
    """
    X = np.asarray(F, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if not np.all(np.isfinite(X)):
        raise NonFinite("k-means input contains non-finite entries")
    n = X.shape[0]
    if c > n:
        raise CTooLarge(f"cannot form {c} clusters from {n} points")
    if c < 1:
        raise ValueError("c must be positive")
    best = None
    for r in range(max(1, restarts)):
        rng = np.random.default_rng(seed + r)
        lab, C, inertia, hist = _lloyd(X, _plusplus(X, c, rng), max_iter)
        if best is None or inertia < best[2]:
            best = (lab, C, inertia, hist)
    lab, C, inertia, hist = best
    return lab.astype(np.int64), KMeansModel(C, inertia, seed, tuple(hist))


def row_normalize(F) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    norms = np.linalg.norm(F, axis=1, keepdims=True)
    return np.divide(F, norms, out=np.zeros_like(F), where=norms > 0)


@dataclass(frozen=True)
class Labeler:
    """Fitted readout that maps embedding rows to cluster labels.

    ``argmax_g`` picks the largest coordinate (lowest index on ties);
    ``kmeans_f`` assigns row-normalized embeddings to frozen centroids.
    """

    method: str
    model: KMeansModel | None = None

    def __call__(self, E) -> np.ndarray:
        E = np.asarray(E, dtype=np.float64)
        if self.method == "argmax_g":
            return np.argmax(E, axis=1).astype(np.int64)
        return self.model.predict(row_normalize(E))


def fit_labeler(E, c: int, method: str = "argmax_g", seed: int = 0, restarts: int = 10):
    """Fit a :class:`Labeler` on an embedding; returns ``(labels, labeler)``."""
    E = np.asarray(E, dtype=np.float64)
    if method == "argmax_g":
        if E.shape[1] != c:
            raise MethodRequiresSquare(f"argmax readout needs m == c, got m={E.shape[1]}, c={c}")
        lab = Labeler("argmax_g")
        return lab(E), lab
    if method == "kmeans_f":
        labels, model = kmeans(row_normalize(E), c, seed=seed, restarts=restarts)
        return labels, Labeler("kmeans_f", model)
    raise ValueError(f"unknown assignment method {method!r}")


def assign_from_embedding(E, c: int, method: str | None = None, seed: int = 0) -> np.ndarray:
    """Cluster labels from a solved embedding pair.

    ``argmax_g`` reads the nonnegative factor ``G`` as a soft indicator;
    ``kmeans_f`` runs k-means on the row-normalized orthonormal factor ``F``.
    The default is ``argmax_g`` when ``m == c`` and ``kmeans_f`` otherwise.
    """
    if method is None:
        method = "argmax_g" if E.m == c else "kmeans_f"
    src = E.G if method == "argmax_g" else E.F
    return fit_labeler(src, c, method, seed)[0]


def hungarian(cost) -> np.ndarray:
    """Minimum-cost perfect assignment; ``perm[i]`` is the column given to row ``i``."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise DimensionMismatch(f"cost matrix must be square, got {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise NonFinite("cost matrix contains non-finite entries")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def _check_pair(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise LengthMismatch(f"label vectors differ in shape: {pred.shape} vs {truth.shape}")
    return pred, truth


def contingency(pred, truth) -> np.ndarray:
    pred, truth = _check_pair(pred, truth)
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max(initial=-1) + 1, t.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def accuracy(pred, truth) -> float:
    """Fraction of samples matched under the best one-to-one label mapping."""
    table = contingency(pred, truth)
    n = int(table.sum())
    if n == 0:
        raise LengthMismatch("empty label vectors")
    k = max(table.shape)
    square = np.zeros((k, k), dtype=np.int64)
    square[: table.shape[0], : table.shape[1]] = table
    perm = hungarian(square.max() - square)
    return int(square[np.arange(k), perm].sum()) / n


def _pairs(x):
    x = np.asarray(x, dtype=np.int64)
    return int((x * (x - 1) // 2).sum())


def pairwise_f1(pred, truth) -> float:
    """Pair-counting F1 over all unordered sample pairs; 0 when no pair agrees."""
    pred, truth = _check_pair(pred, truth)
    if pred.shape[0] < 2:
        raise LengthMismatch("pairwise F1 needs at least two samples")
    table = contingency(pred, truth)
    tp = _pairs(table.ravel())
    fp = _pairs(table.sum(axis=1)) - tp
    fn = _pairs(table.sum(axis=0)) - tp
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)
