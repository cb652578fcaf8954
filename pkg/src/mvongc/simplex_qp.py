"""Least squares over the probability simplex, in Gram form.

The problem ``min ||B a - c||^2`` subject to ``a >= 0, sum(a) = 1`` is stored
through ``Q_raw = B'B`` and ``V = B'c`` only; ``B`` itself (``n^2`` rows when the
columns are vectorized graphs) is never needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._backend import kernels
from .errors import DimensionMismatch, NoConvergence, NonFinite, SingularSystem

MAX_PGD_ITER = 100_000


@dataclass(frozen=True)
class QpProblem:
    Q_raw: np.ndarray
    V: np.ndarray
    ridge_eps: float = 1e-10

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q_raw, dtype=np.float64))
        V = np.atleast_1d(np.asarray(self.V, dtype=np.float64))
        if Q.shape != (V.shape[0], V.shape[0]):
            raise DimensionMismatch(f"Q_raw shape {Q.shape} does not match V length {V.shape[0]}")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(V))):
            raise NonFinite("QP data contains non-finite entries")
        if self.ridge_eps < 0:
            raise ValueError("ridge_eps must be nonnegative")
        if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-10 * max(1.0, np.abs(Q).max()):
            raise ValueError("Q_raw must be symmetric")
        Q = 0.5 * (Q + Q.T)
        try:
            np.linalg.cholesky(Q + self.ridge_eps * np.eye(Q.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise SingularSystem("Q_raw + ridge_eps*I is not positive definite") from exc
        Q.setflags(write=False)
        V = V.copy()
        V.setflags(write=False)
        object.__setattr__(self, "Q_raw", Q)
        object.__setattr__(self, "V", V)

    @property
    def size(self) -> int:
        return self.V.shape[0]

    def regularized(self) -> np.ndarray:
        return self.Q_raw + self.ridge_eps * np.eye(self.size)

    def objective(self, alpha) -> float:
        """``a'Qa - 2 V'a``: the least-squares residual up to the constant ``||c||^2``."""
        a = np.asarray(alpha, dtype=np.float64)
        return float(a @ self.regularized() @ a - 2.0 * self.V @ a)

    @classmethod
    def from_least_squares(cls, B, c, ridge_eps=1e-10) -> "QpProblem":
        B = np.asarray(B, dtype=np.float64)
        c = np.asarray(c, dtype=np.float64)
        return cls(B.T @ B, B.T @ c, ridge_eps)


def project_simplex(y) -> np.ndarray:
    """Euclidean projection onto ``{a >= 0, sum(a) = 1}`` (sort and threshold)."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if not np.all(np.isfinite(y)):
        raise NonFinite("cannot project a non-finite vector")
    return kernels.project_simplex(y)


def kkt_affine_solution(p: QpProblem) -> np.ndarray:
    """Minimizer over the affine set ``sum(a) = 1`` ignoring ``a >= 0``.

    This is ``J = QV + Q1/N - Q1 1'QV / N`` with ``Q = (Q_raw + eps I)^{-1}``
    and ``N = 1'Q1``.
    """
    try:
        cf = scipy.linalg.cho_factor(p.regularized())
        QV = scipy.linalg.cho_solve(cf, p.V)
        Q1 = scipy.linalg.cho_solve(cf, np.ones(p.size))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem("Gram system is singular even with ridge") from exc
    N = Q1.sum()
    if not np.isfinite(N) or N <= 0:
        raise SingularSystem("1'Q1 is not positive")
    return QV + Q1 / N - Q1 * QV.sum() / N


def closed_form_kkt(p: QpProblem) -> np.ndarray:
    """Clamp the affine KKT solution at zero and renormalize.

    Exact when ``J >= 0``; otherwise only a heuristic, since clamping drops
    the complementarity conditions. :func:`exact_simplex_qp` is the solver
    the clustering loop relies on.
    """
    J = kkt_affine_solution(p)
    if np.all(J >= 0.0):
        return J
    a = np.maximum(J, 0.0)
    return a / a.sum()


def exact_simplex_qp(p: QpProblem, x0=None, tol: float = 1e-10, max_iter: int = MAX_PGD_ITER) -> np.ndarray:
    """Solve the simplex QP by accelerated projected gradient.

    Runs until the step-normalized gradient mapping is ``<= tol``. With a warm
    start ``x0`` the result never has a larger objective than ``x0`` itself.
    """
    n = p.size
    if n == 1:
        return np.ones(1)
    Q = p.regularized()
    lipschitz = float(np.linalg.eigvalsh(Q)[-1])
    if lipschitz <= 0.0:
        raise SingularSystem("Gram matrix has no positive curvature")
    start = np.full(n, 1.0 / n) if x0 is None else project_simplex(x0)
    x, iters, converged = kernels.simplex_pgd(Q, p.V, start, lipschitz, tol, int(max_iter))
    if not converged:
        raise NoConvergence(f"simplex QP did not reach tol={tol:g} in {iters} iterations")
    if x0 is not None and p.objective(start) < p.objective(x):
        return start
    return x
