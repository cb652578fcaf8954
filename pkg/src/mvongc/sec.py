"""Spectral-embedded-clustering variant with a linear out-of-sample map.

A ridge regression from raw features to the embedding is folded into the
graph as ``L_o = sum_v alpha_v A_v - gamma_hat * L_g``, with

    L_g = H - X_c^T (X_c X_c^T + eta I_d)^{-1} X_c,   H = I - 11^T / n

(``X_c`` the centered features, ``d x n``). The fitted regression then maps
unseen samples into the embedding space.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidConfig
from .graphs import FeatureMatrix, MultiViewGraphSet
from .solver import SolverConfig, SolverState, _run


@dataclass(frozen=True)
class SecConfig:
    base: SolverConfig
    gamma_hat: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        if not self.gamma_hat >= 0:
            raise InvalidConfig(f"gamma_hat must be nonnegative, got {self.gamma_hat}")
        if not self.eta > 0:
            raise InvalidConfig(f"eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class SecModel:
    """Fitted affine map ``x -> x W_hat + b`` plus the cached graph term."""

    W_hat: np.ndarray
    b: np.ndarray
    L_g: np.ndarray | None = None
    eta: float = 1.0
    gamma_hat: float = 1.0

    @property
    def d(self) -> int:
        return self.W_hat.shape[0]

    @property
    def m(self) -> int:
        return self.W_hat.shape[1]

    def embed(self, X) -> np.ndarray:
        X = X.data if isinstance(X, FeatureMatrix) else np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise DimensionMismatch(f"model expects {self.d} features, got {X.shape[1]}")
        return X @ self.W_hat + self.b[None, :]

    def to_dict(self) -> dict:
        return {
            "w": self.W_hat.ravel(order="C").tolist(),
            "d": int(self.d),
            "m": int(self.m),
            "b": self.b.tolist(),
            "eta": float(self.eta),
            "gamma_hat": float(self.gamma_hat),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "SecModel":
        d, m = int(obj["d"]), int(obj["m"])
        w = np.asarray(obj["w"], dtype=np.float64)
        if w.size != d * m:
            raise DimensionMismatch(f"'w' has {w.size} entries, expected {d}x{m}")
        b = np.asarray(obj["b"], dtype=np.float64)
        if b.shape != (m,):
            raise DimensionMismatch(f"'b' has shape {b.shape}, expected ({m},)")
        return cls(w.reshape(d, m), b, None, float(obj["eta"]), float(obj["gamma_hat"]))

    @classmethod
    def from_json(cls, text: str) -> "SecModel":
        return cls.from_dict(json.loads(text))


def _features(X) -> np.ndarray:
    return (X if isinstance(X, FeatureMatrix) else FeatureMatrix(X)).data


def _ridge_solve(Xc, rhs, eta):
    # (Xc^T Xc + eta I_d)^{-1} rhs in the sample-major layout
    d = Xc.shape[1]
    return scipy.linalg.solve(Xc.T @ Xc + eta * np.eye(d), rhs, assume_a="pos")


def regression_params(X, F, eta: float, center: bool = True):
    """Ridge regression of the embedding on the features.

    Returns ``(W_hat, b)`` with ``W_hat = (X X^T + eta I)^{-1} X F`` on the
    ``d x n`` feature layout and ``b`` the intercept. With ``center=True``
    (the default) ``X`` is centered first and ``b`` absorbs the mean, so that
    in centered coordinates ``b = F^T 1 / n`` and the pair minimizes
    ``||X^T W + 1 b^T - F||^2 + eta ||W||^2`` exactly.
    """
    X = _features(X)
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"F has shape {F.shape}, features have {X.shape[0]} rows")
    if not eta > 0:
        raise InvalidConfig("eta must be positive")
    mean = X.mean(axis=0) if center else np.zeros(X.shape[1])
    Xc = X - mean
    W = _ridge_solve(Xc, Xc.T @ F, eta)
    b = F.mean(axis=0) - mean @ W
    return W, b


def sec_graph_term(X, eta: float, center: bool = True) -> np.ndarray:
    """``L_g = H - X^T (X X^T + eta I)^{-1} X`` on centered features (``n x n``)."""
    X = _features(X)
    if not eta > 0:
        raise InvalidConfig("eta must be positive")
    n = X.shape[0]
    Xc = X - X.mean(axis=0) if center else X
    K = Xc @ _ridge_solve(Xc, Xc.T, eta)
    L = np.eye(n) - np.full((n, n), 1.0 / n) - K
    return 0.5 * (L + L.T)


def solve_sec(views: MultiViewGraphSet, X, config: SecConfig, callback=None) -> tuple[SolverState, SecModel]:
    """Block descent on ``||L_o - F G^T||^2 + mu ||F - G||^2`` with ``L_o = sum alpha_v A_v - gamma_hat L_g``.

    ``L_g`` depends only on ``X`` and ``eta`` and is computed once; the
    regression pair is refitted on the final ``F``. With ``gamma_hat = 0`` the
    iterates coincide bit for bit with :func:`mvongc.solver.solve`.
    """
    Xd = _features(X)
    if Xd.shape[0] != views.n:
        raise DimensionMismatch(f"features have {Xd.shape[0]} rows, graphs have n={views.n}")
    L_g = sec_graph_term(Xd, config.eta)
    state = _run(views, config.base, offset=config.gamma_hat * L_g, callback=callback)
    W, b = regression_params(Xd, state.F, config.eta)
    return state, SecModel(W, b, L_g, config.eta, config.gamma_hat)


def predict_out_of_sample(X_new, model: SecModel, assign) -> np.ndarray:
    """Labels for unseen samples: embed with ``x W_hat + b``, then apply the fitted labeler."""
    return np.asarray(assign(model.embed(X_new)), dtype=np.int64)
