"""Per-view similarity graphs: construction, sparsification, normalization."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import (
    DegenerateScale,
    DimensionMismatch,
    IsolatedVertex,
    KOutOfRange,
    NoConvergence,
    NonFinite,
)

NORMALIZATIONS = ("raw", "symmetric", "doubly_stochastic")


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FeatureMatrix:
    """Sample-major feature matrix, shape ``(n, d)``.

    Stored transposed relative to the ``d x n`` column-sample convention used
    in the regression formulas of :mod:`mvongc.sec`.
    """

    data: np.ndarray
    view_id: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise DimensionMismatch(f"feature matrix must be 2-D, got ndim={data.ndim}")
        if data.shape[0] < 2:
            raise DimensionMismatch(f"need at least 2 samples, got {data.shape[0]}")
        if not np.all(np.isfinite(data)):
            raise NonFinite("feature matrix contains non-finite entries")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric nonnegative ``n x n`` affinity matrix.

    ``tol`` is the row/column-sum deviation recorded by
    :func:`doubly_stochastic`; it is ``None`` for the other normalizations.
    The input is symmetrized exactly on construction, so callers must check
    asymmetry themselves when it matters (see :func:`mvongc.cli.load_views`).
    """

    data: np.ndarray
    normalization: str = "raw"
    tol: float | None = None

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"similarity matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFinite("similarity matrix contains non-finite entries")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        a = 0.5 * (a + a.T)
        if a.size and a.min() < 0.0:
            raise ValueError("similarity matrix has negative entries")
        object.__setattr__(self, "data", _frozen(a))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def degrees(self) -> np.ndarray:
        return self.data.sum(axis=1)


@dataclass(frozen=True)
class MultiViewGraphSet:
    views: tuple
    n: int = field(init=False)

    def __post_init__(self):
        views = tuple(self.views)
        if not views:
            raise DimensionMismatch("a graph set needs at least one view")
        n = views[0].n
        norm = views[0].normalization
        for v in views:
            if v.n != n:
                raise DimensionMismatch(f"views disagree on n: {v.n} != {n}")
            if v.normalization != norm:
                raise DimensionMismatch("views must share a normalization mode")
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "n", n)

    def __len__(self):
        return len(self.views)

    def __iter__(self):
        return iter(self.views)

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def normalization(self) -> str:
        return self.views[0].normalization

    def arrays(self) -> list[np.ndarray]:
        return [v.data for v in self.views]

    @classmethod
    def from_arrays(cls, arrays, normalization="raw") -> "MultiViewGraphSet":
        return cls(tuple(SimilarityMatrix(a, normalization) for a in arrays))


def gaussian_similarity(X, sigma="auto") -> SimilarityMatrix:
    """Dense Gaussian kernel ``exp(-||x_i - x_j||^2 / (2 sigma^2))``.

    With ``sigma="auto"`` the bandwidth is the median of the nonzero pairwise
    Euclidean distances.
    """
    if not isinstance(X, FeatureMatrix):
        X = FeatureMatrix(X)
    dist = pdist(X.data)
    if isinstance(sigma, str):
        if sigma != "auto":
            raise ValueError(f"sigma must be a positive number or 'auto', got {sigma!r}")
        nz = dist[dist > 0.0]
        sigma = float(np.median(nz)) if nz.size else 0.0
        if sigma <= 0.0:
            raise DegenerateScale("median pairwise distance is zero; all samples coincide")
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise DegenerateScale(f"sigma must be positive and finite, got {sigma}")
    A = squareform(np.exp(-(dist**2) / (2.0 * sigma**2)))
    np.fill_diagonal(A, 1.0)
    return SimilarityMatrix(A, "raw")


def knn_sparsify(A: SimilarityMatrix, k: int) -> SimilarityMatrix:
    """Keep each row's ``k`` largest off-diagonal entries, then symmetrize.

    Ties go to the lowest column index. The result is ``(B + B^T) / 2`` with a
    zero diagonal, so mutual neighbours keep full weight and one-sided ones
    keep half.
    """
    n = A.n
    if not (1 <= k <= n - 1):
        raise KOutOfRange(f"k must lie in [1, {n - 1}], got {k}")
    a = A.data.copy()
    np.fill_diagonal(a, -np.inf)
    order = np.argsort(-a, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    cols = order.ravel()
    B = np.zeros_like(a)
    B[rows, cols] = A.data[rows, cols]
    B = 0.5 * (B + B.T)
    np.fill_diagonal(B, 0.0)
    return SimilarityMatrix(B, "raw")


def _inv_sqrt_degrees(a: np.ndarray) -> np.ndarray:
    deg = a.sum(axis=1)
    if np.any(deg <= 0.0):
        bad = int(np.flatnonzero(deg <= 0.0)[0])
        raise IsolatedVertex(f"vertex {bad} has zero degree")
    return 1.0 / np.sqrt(deg)


def symmetric_normalize(A: SimilarityMatrix) -> SimilarityMatrix:
    """Return ``D^{-1/2} A D^{-1/2}`` with ``D`` the diagonal of row sums."""
    s = _inv_sqrt_degrees(A.data)
    return SimilarityMatrix(s[:, None] * A.data * s[None, :], "symmetric")


def _max_sum_deviation(a: np.ndarray) -> float:
    return float(max(np.abs(a.sum(axis=1) - 1.0).max(), np.abs(a.sum(axis=0) - 1.0).max()))


def doubly_stochastic(A: SimilarityMatrix, tol: float = 1e-8, max_iter: int = 1000) -> SimilarityMatrix:
    """Balance ``A`` to unit row and column sums by repeated symmetric scaling.

    Each sweep applies ``A <- D^{-1/2} A D^{-1/2}``. The returned matrix
    records the deviation it actually achieves as ``tol``. Raises
    :class:`NoConvergence` if ``max_iter`` sweeps leave a deviation above
    ``10 * tol``.
    """
    a = np.array(A.data, dtype=np.float64)
    _inv_sqrt_degrees(a)
    dev = _max_sum_deviation(a)
    it = 0
    while dev > tol and it < max_iter:
        s = _inv_sqrt_degrees(a)
        a = s[:, None] * a * s[None, :]
        a = 0.5 * (a + a.T)
        dev = _max_sum_deviation(a)
        it += 1
    if dev > 10.0 * tol:
        raise NoConvergence(
            f"Sinkhorn balancing stalled at deviation {dev:.3e} after {it} sweeps (tol={tol:g})"
        )
    return SimilarityMatrix(a, "doubly_stochastic", tol=max(dev, 0.0))


def laplacian(A: SimilarityMatrix) -> np.ndarray:
    """Normalized Laplacian ``I - D^{-1/2} A D^{-1/2}``."""
    S = symmetric_normalize(A).data
    return np.eye(A.n) - S


def normalize(A: SimilarityMatrix, mode: str, tol: float = 1e-8, max_iter: int = 1000) -> SimilarityMatrix:
    """Dispatch on a normalization name (``raw``/``sym``/``ds`` or long forms)."""
    if mode in ("raw", None):
        return A
    if mode in ("sym", "symmetric"):
        return symmetric_normalize(A)
    if mode in ("ds", "doubly_stochastic"):
        return doubly_stochastic(A, tol=tol, max_iter=max_iter)
    raise ValueError(f"unknown normalization {mode!r}")


def build_graphs(features, sigma="auto", knn: int = 0, normalization: str = "ds") -> MultiViewGraphSet:
    """Gaussian graph per feature view, optionally kNN-sparsified, then normalized."""
    views = []
    for X in features:
        A = gaussian_similarity(X, sigma)
        if knn:
            A = knn_sparsify(A, knn)
        views.append(normalize(A, normalization))
    return MultiViewGraphSet(tuple(views))
