import numpy as np
import pytest

import mvongc.simplex_qp as simplex_qp_mod
from mvongc import _kernels_py
from mvongc._backend import BACKEND
from mvongc.graphs import MultiViewGraphSet, SimilarityMatrix, doubly_stochastic

try:
    from mvongc import _kernels as _kernels_c
except ImportError:  # pragma: no cover - depends on the build
    _kernels_c = None

BACKENDS = {"python": _kernels_py}
if _kernels_c is not None:
    BACKENDS["compiled"] = _kernels_c

ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(BACKENDS))
def kernels(request, monkeypatch):
    """Run a test once per available kernel backend."""
    mod = BACKENDS[request.param]
    monkeypatch.setattr(simplex_qp_mod, "kernels", mod)
    return mod


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graph_views(rng, n, n_views, normalization="ds"):
    """Random symmetric positive matrices, balanced to doubly stochastic by default."""
    views = []
    for _ in range(n_views):
        a = rng.random((n, n)) ** 3
        a = a + a.T
        A = SimilarityMatrix(a)
        views.append(doubly_stochastic(A) if normalization == "ds" else A)
    return MultiViewGraphSet(tuple(views))


def random_orthonormal(rng, n, m):
    return np.linalg.qr(rng.standard_normal((n, m)))[0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
