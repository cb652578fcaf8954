"""Pure-Python implementations of the hot kernels.

Mirrors ``_kernels.pyx`` step for step; used when the compiled extension is
unavailable or ``MVONGC_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np


def project_simplex(y):
    """Euclidean projection of ``y`` onto the probability simplex."""
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    u = np.sort(y)[::-1]
    css = 0.0
    tau = 0.0
    for j in range(n):
        css += u[j]
        t = (css - 1.0) / (j + 1)
        if u[j] - t > 0.0:
            tau = t
    return np.maximum(y - tau, 0.0)


def _residual(Q, V, x, inv_l):
    g = Q @ x - V
    z = project_simplex(x - inv_l * g)
    return float(np.max(np.abs(x - z)))


def simplex_pgd(Q, V, x0, lipschitz, tol, max_iter):
    """Accelerated projected gradient for ``min 0.5 x'Qx - V'x`` on the simplex.

    Returns ``(x, iterations, converged)``. Stops when the step-normalized
    gradient mapping ``max|x - P(x - grad/L)|`` is at most ``tol``. Momentum
    is reset whenever the step direction disagrees with the last move.
    """
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    V = np.ascontiguousarray(V, dtype=np.float64)
    inv_l = 1.0 / lipschitz
    x = project_simplex(x0)
    if _residual(Q, V, x, inv_l) <= tol:
        return x, 0, True
    y = x.copy()
    t = 1.0
    for k in range(1, max_iter + 1):
        g = Q @ y - V
        x_new = project_simplex(y - inv_l * g)
        if _residual(Q, V, x_new, inv_l) <= tol:
            return x_new, k, True
        step = x_new - x
        if float(np.dot(y - x_new, step)) > 0.0:
            t = 1.0
            y = x_new.copy()
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * step
            t = t_new
        x = x_new
    return x, max_iter, False
