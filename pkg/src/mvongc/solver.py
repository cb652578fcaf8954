"""Three-block coordinate descent for multi-view orthonormal nonnegative graph factorization.

Minimizes::

    || sum_v alpha_v A_v - F G^T ||_F^2 + mu || F - G ||_F^2

over ``F^T F = I``, ``G >= 0`` and ``alpha`` on the probability simplex. Each
block update is the exact minimizer of its subproblem, so the objective is
non-increasing from one outer iteration to the next.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidConfig, NoProgress, NonFinite
from .graphs import MultiViewGraphSet
from .simplex_qp import QpProblem, exact_simplex_qp

logger = logging.getLogger(__name__)

INCREASE_TOL = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    Parameters
    ----------
    mu : float
        Weight of the ``||F - G||^2`` coupling term; must be positive.
    c : int
        Number of clusters.
    m : int, optional
        Embedding dimension; defaults to ``c``.
    max_iter : int
        Cap on outer iterations.
    tol : float
        Stop once ``|obj_t - obj_{t-1}| / max(obj_{t-1}, 1e-12) <= tol``.
    seed : int
        Seed for the random orthonormal initialization.
    ridge_eps : float
        Ridge added to the view Gram matrix in the weight update.
    qp_tol : float
        Optimality tolerance of the inner simplex QP.
    """

    mu: float = 1.0
    c: int = 2
    m: int | None = None
    max_iter: int = 100
    tol: float = 1e-6
    seed: int = 0
    ridge_eps: float = 1e-10
    qp_tol: float = 1e-10

    def __post_init__(self):
        if self.m is None:
            object.__setattr__(self, "m", self.c)
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise InvalidConfig(f"mu must be positive, got {self.mu}")
        if self.c < 2:
            raise InvalidConfig(f"c must be at least 2, got {self.c}")
        if self.m < 1:
            raise InvalidConfig(f"m must be at least 1, got {self.m}")
        if not self.tol > 0:
            raise InvalidConfig(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidConfig(f"max_iter must be at least 1, got {self.max_iter}")
        if self.ridge_eps < 0:
            raise InvalidConfig("ridge_eps must be nonnegative")


@dataclass(frozen=True)
class EmbeddingPair:
    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        if np.shape(self.F) != np.shape(self.G) or np.ndim(self.F) != 2:
            raise DimensionMismatch(f"F {np.shape(self.F)} and G {np.shape(self.G)} must share an n x m shape")

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def m(self) -> int:
        return self.F.shape[1]


@dataclass(frozen=True)
class ViewWeights:
    alpha: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=np.float64))
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatch("view weights must be a non-empty vector")
        if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-10:
            raise ValueError(f"view weights must lie on the simplex, got {a}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def uniform(cls, n_views: int) -> "ViewWeights":
        return cls(np.full(n_views, 1.0 / n_views))


@dataclass
class SolverState:
    embedding: EmbeddingPair
    weights: ViewWeights
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    initial_objective: float = float("nan")
    history: dict = field(default_factory=dict)

    @property
    def F(self):
        return self.embedding.F

    @property
    def G(self):
        return self.embedding.G

    @property
    def alpha(self):
        return self.weights.alpha


def _check_views(views, n, m=None):
    if views.n != n:
        raise DimensionMismatch(f"graphs have n={views.n} but embedding has n={n}")


def _alpha_of(w) -> np.ndarray:
    return w.alpha if isinstance(w, ViewWeights) else np.asarray(w, dtype=np.float64)


def combine(views: MultiViewGraphSet, w) -> np.ndarray:
    """``sum_v alpha_v A_v``, accumulated in view order."""
    alpha = _alpha_of(w)
    if alpha.shape[0] != views.n_views:
        raise DimensionMismatch(f"{alpha.shape[0]} weights for {views.n_views} views")
    S = alpha[0] * views.views[0].data
    for a, v in zip(alpha[1:], views.views[1:]):
        S = S + a * v.data
    return S


def _objective(S, F, G, mu) -> float:
    R = S - F @ G.T
    D = F - G
    return float(np.vdot(R, R) + mu * np.vdot(D, D))


def objective(views: MultiViewGraphSet, E: EmbeddingPair, w, mu: float) -> float:
    """``||sum_v alpha_v A_v - F G^T||_F^2 + mu ||F - G||_F^2``."""
    _check_views(views, E.n)
    return _objective(combine(views, w), E.F, E.G, mu)


def orthogonal_procrustes(M) -> np.ndarray:
    """Maximizer of ``Tr(F^T M)`` over ``F^T F = I``: ``U V^T`` from the thin SVD of ``M``."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < M.shape[1]:
        raise DimensionMismatch(f"need an n x m matrix with n >= m, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFinite("Procrustes input contains non-finite entries")
    U, _, Vt = np.linalg.svd(M, full_matrices=False)
    return U @ Vt


def _update_f(S, G, mu):
    return orthogonal_procrustes(S @ G + mu * G)


def _update_g(S, F, mu):
    return np.maximum((S @ F + mu * F) / (1.0 + mu), 0.0)


def update_f(views: MultiViewGraphSet, G, w, mu: float) -> np.ndarray:
    """Optimal ``F`` for fixed ``G`` and weights: Procrustes on ``(sum_v alpha_v A_v) G + mu G``."""
    G = np.asarray(G, dtype=np.float64)
    _check_views(views, G.shape[0])
    return _update_f(combine(views, w), G, mu)


def update_g(views: MultiViewGraphSet, F, w, mu: float) -> np.ndarray:
    """Optimal ``G >= 0`` for fixed ``F`` and weights.

    With ``F^T F = I`` the subproblem separates per entry, and the minimizer is
    the positive part of ``((sum_v alpha_v A_v + mu I) / (1 + mu)) F``.
    """
    F = np.asarray(F, dtype=np.float64)
    _check_views(views, F.shape[0])
    if mu <= -1:
        raise InvalidConfig("mu must exceed -1")
    return _update_g(combine(views, w), F, mu)


def gram_matrix(views: MultiViewGraphSet) -> np.ndarray:
    """Frobenius inner products ``<A_u, A_v>`` between all view pairs."""
    arrays = views.arrays()
    k = len(arrays)
    Q = np.empty((k, k))
    for u in range(k):
        for v in range(u, k):
            Q[u, v] = Q[v, u] = float(np.vdot(arrays[u], arrays[v]))
    return Q


def _target_products(views, F, G) -> np.ndarray:
    # <A_v, F G^T> = sum(G * (A_v F)) for symmetric A_v
    return np.array([float(np.vdot(A @ F, G)) for A in views.arrays()])


def update_alpha(views: MultiViewGraphSet, E: EmbeddingPair, ridge_eps: float = 1e-10,
                 alpha0=None, gram=None, offset_products=None, qp_tol: float = 1e-10) -> ViewWeights:
    """Optimal view weights for fixed ``F`` and ``G``.

    Solves ``min ||sum_v alpha_v A_v - F G^T||^2`` over the simplex through its
    ``n_v x n_v`` Gram system. ``offset_products`` is added to ``B'c`` and
    shifts the target (used by the SEC variant).
    """
    _check_views(views, E.n)
    if views.n_views == 1:
        return ViewWeights(np.ones(1))
    Q = gram_matrix(views) if gram is None else gram
    V = _target_products(views, E.F, E.G)
    if offset_products is not None:
        V = V + offset_products
    alpha = exact_simplex_qp(QpProblem(Q, V, ridge_eps), x0=alpha0, tol=qp_tol)
    return ViewWeights(alpha)


def init_embedding(n: int, m: int, seed: int) -> EmbeddingPair:
    """Random orthonormal ``F``; ``G`` is an independent orthonormal draw clamped at zero."""
    rng = np.random.default_rng(seed)
    F = np.linalg.qr(rng.standard_normal((n, m)))[0]
    G = np.linalg.qr(rng.standard_normal((n, m)))[0]
    return EmbeddingPair(F, np.maximum(G, 0.0))


def _run(views: MultiViewGraphSet, config: SolverConfig, offset=None, callback=None) -> SolverState:
    n, m, mu = views.n, config.m, config.mu
    if m > n:
        raise InvalidConfig(f"m={m} exceeds n={n}")
    E = init_embedding(n, m, config.seed)
    F, G = E.F, E.G
    alpha = ViewWeights.uniform(views.n_views).alpha
    gram = gram_matrix(views) if views.n_views > 1 else None
    offset_products = None
    if offset is not None:
        offset_products = np.array([float(np.vdot(A, offset)) for A in views.arrays()])

    def target(a):
        S = combine(views, a)
        return S if offset is None else S - offset

    T = target(alpha)
    prev = _objective(T, F, G, mu)
    initial = prev
    trace = []
    converged = False
    for it in range(1, config.max_iter + 1):
        F = _update_f(T, G, mu)
        if callback is not None:
            callback("F", it, F, G, alpha)
        G = _update_g(T, F, mu)
        if callback is not None:
            callback("G", it, F, G, alpha)
        if views.n_views > 1:
            alpha = update_alpha(views, EmbeddingPair(F, G), config.ridge_eps, alpha0=alpha, gram=gram,
                                 offset_products=offset_products, qp_tol=config.qp_tol).alpha
            T = target(alpha)
        if callback is not None:
            callback("alpha", it, F, G, alpha)
        obj = _objective(T, F, G, mu)
        trace.append(obj)
        if obj - prev > INCREASE_TOL * max(prev, 1e-12):
            raise NoProgress(f"objective rose from {prev:.12g} to {obj:.12g} at iteration {it}")
        rel = abs(obj - prev) / max(prev, 1e-12)
        logger.debug("iter %d objective %.12g rel %.3e", it, obj, rel)
        prev = obj
        if rel <= config.tol:
            converged = True
            break
    return SolverState(EmbeddingPair(F, G), ViewWeights(alpha), np.asarray(trace), len(trace), converged,
                       initial_objective=initial)


def solve(views: MultiViewGraphSet, config: SolverConfig, callback=None) -> SolverState:
    """Alternate F, G and weight updates until the relative objective change is below ``tol``.

    ``callback(stage, iteration, F, G, alpha)`` is called after each block
    update when given; ``stage`` is one of ``"F"``, ``"G"``, ``"alpha"``.
    """
    return _run(views, config, callback=callback)
