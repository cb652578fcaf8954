import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mvongc.errors import DegenerateScale, IsolatedVertex, KOutOfRange, NoConvergence, NonFinite
from mvongc.graphs import (
    FeatureMatrix,
    MultiViewGraphSet,
    SimilarityMatrix,
    build_graphs,
    doubly_stochastic,
    gaussian_similarity,
    knn_sparsify,
    laplacian,
    symmetric_normalize,
)

features = arrays(
    np.float64,
    st.tuples(st.integers(2, 12), st.integers(1, 4)),
    elements=st.floats(-10, 10, allow_nan=False),
)


def sinkhorn_oracle(a, iters=5000):
    """Plain alternating row/column Sinkhorn, independent of the symmetric variant."""
    a = np.array(a, dtype=float)
    for _ in range(iters):
        a = a / a.sum(axis=1, keepdims=True)
        a = a / a.sum(axis=0, keepdims=True)
    return a


class TestGaussian:
    def test_identical_rows(self):
        A = gaussian_similarity(np.array([[1.0, 2.0], [1.0, 2.0]]), sigma=1.0)
        np.testing.assert_array_equal(A.data, np.ones((2, 2)))

    def test_scalar_kernel_value(self):
        A = gaussian_similarity(np.array([[0.0, 0.0], [1.0, 0.0]]), sigma=1.0)
        assert A.data[0, 1] == pytest.approx(np.exp(-0.5), abs=1e-15)
        assert A.data[0, 1] == pytest.approx(0.60653, abs=1e-5)

    def test_auto_sigma_is_median_distance(self, rng):
        X = rng.standard_normal((7, 3))
        A = gaussian_similarity(X, "auto")
        dists = [np.linalg.norm(X[i] - X[j]) for i in range(7) for j in range(i + 1, 7)]
        sigma = np.median(dists)
        assert A.data[2, 5] == pytest.approx(np.exp(-np.sum((X[2] - X[5]) ** 2) / (2 * sigma**2)), rel=1e-12)

    def test_degenerate_auto_scale(self):
        with pytest.raises(DegenerateScale):
            gaussian_similarity(np.zeros((3, 2)), "auto")

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            gaussian_similarity(np.array([[0.0], [np.nan]]), 1.0)

    @settings(max_examples=50, deadline=None)
    @given(features)
    def test_unit_diagonal_and_symmetry(self, X):
        A = gaussian_similarity(X, sigma=1.3)
        np.testing.assert_array_equal(np.diag(A.data), 1.0)
        assert np.max(np.abs(A.data - A.data.T)) <= 1e-12
        assert A.data.min() >= 0.0
        assert A.normalization == "raw"


class TestKnn:
    def test_keep_all(self, rng):
        A = gaussian_similarity(rng.standard_normal((6, 2)), 1.0)
        B = knn_sparsify(A, 5)
        off = ~np.eye(6, dtype=bool)
        np.testing.assert_allclose(B.data[off], A.data[off], rtol=0, atol=1e-15)
        np.testing.assert_array_equal(np.diag(B.data), 0.0)

    def test_three_by_three_hand_case(self):
        # top neighbour per row: 0->1, 1->0, 2->1; edge (0,1) mutual, (2,1) one-sided
        A = SimilarityMatrix(np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.5], [0.1, 0.5, 1.0]]))
        B = knn_sparsify(A, 1)
        expected = np.array([[0.0, 0.9, 0.0], [0.9, 0.0, 0.25], [0.0, 0.25, 0.0]])
        np.testing.assert_allclose(B.data, expected, atol=1e-15)

    def test_ties_prefer_lowest_column(self):
        A = SimilarityMatrix(np.full((4, 4), 0.5) + 0.5 * np.eye(4))
        B = knn_sparsify(A, 1)
        # row 0 picks column 1, rows 1..3 pick column 0
        expected = np.zeros((4, 4))
        expected[0, 1] = expected[1, 0] = 0.5
        expected[0, 2] = expected[2, 0] = 0.25
        expected[0, 3] = expected[3, 0] = 0.25
        np.testing.assert_allclose(B.data, expected)

    @pytest.mark.parametrize("k", [0, 4, -1])
    def test_out_of_range(self, k):
        with pytest.raises(KOutOfRange):
            knn_sparsify(SimilarityMatrix(np.ones((4, 4))), k)

    @settings(max_examples=40, deadline=None)
    @given(features, st.integers(1, 3))
    def test_nonzeros_bounded(self, X, k):
        n = X.shape[0]
        k = min(k, n - 1)
        A = gaussian_similarity(X, 1.0)
        B = knn_sparsify(A, k)
        # per-row counts can exceed 2k through incoming picks; the total cannot
        assert (B.data != 0).sum() <= 2 * k * n
        for i in range(n):
            own = np.argsort(-np.where(np.eye(n, dtype=bool)[i], -np.inf, A.data[i]), kind="stable")[:k]
            incoming = [j for j in range(n) if B.data[i, j] != 0 and j not in own]
            for j in incoming:
                assert B.data[i, j] == pytest.approx(0.5 * A.data[i, j])
        assert np.max(np.abs(B.data - B.data.T)) <= 1e-12


class TestNormalization:
    def test_identity_fixed_point(self):
        np.testing.assert_array_equal(symmetric_normalize(SimilarityMatrix(np.eye(3))).data, np.eye(3))

    def test_uniform_graph(self):
        S = symmetric_normalize(SimilarityMatrix(np.ones((4, 4))))
        np.testing.assert_allclose(S.data, np.full((4, 4), 0.25))
        assert S.normalization == "symmetric"

    def test_two_by_two(self):
        S = symmetric_normalize(SimilarityMatrix(np.array([[0.0, 2.0], [2.0, 0.0]])))
        np.testing.assert_allclose(S.data, [[0.0, 1.0], [1.0, 0.0]])

    def test_isolated_vertex(self):
        a = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(IsolatedVertex):
            symmetric_normalize(SimilarityMatrix(a))
        with pytest.raises(IsolatedVertex):
            doubly_stochastic(SimilarityMatrix(a))
        with pytest.raises(IsolatedVertex):
            laplacian(SimilarityMatrix(a))

    def test_idempotent_on_unit_row_sums(self, rng):
        D = doubly_stochastic(SimilarityMatrix(rng.random((6, 6)) + 0.1), tol=1e-13)
        once = symmetric_normalize(D)
        twice = symmetric_normalize(once)
        np.testing.assert_allclose(twice.data, once.data, atol=1e-10)

    def test_ds_fixed_point(self):
        a = np.array([[0.5, 0.5], [0.5, 0.5]])
        D = doubly_stochastic(SimilarityMatrix(a))
        np.testing.assert_allclose(D.data, a, atol=1e-8)

    def test_ds_uniform(self):
        D = doubly_stochastic(SimilarityMatrix(np.ones((5, 5))))
        np.testing.assert_allclose(D.data, np.full((5, 5), 0.2), atol=1e-8)

    def test_ds_two_by_two_matches_sinkhorn_oracle(self):
        a = np.array([[1.0, 2.0], [2.0, 1.0]])
        D = doubly_stochastic(SimilarityMatrix(a), tol=1e-8)
        oracle = sinkhorn_oracle(a)
        np.testing.assert_allclose(D.data, oracle, atol=1e-8)
        np.testing.assert_allclose(D.data.sum(axis=0), 1.0, atol=1e-8)
        np.testing.assert_allclose(D.data.sum(axis=1), 1.0, atol=1e-8)

    def test_ds_records_achieved_tolerance(self, rng):
        a = rng.random((8, 8))
        D = doubly_stochastic(SimilarityMatrix(a + a.T), tol=1e-9)
        assert D.normalization == "doubly_stochastic"
        assert D.tol <= 1e-9
        dev = max(np.abs(D.data.sum(0) - 1).max(), np.abs(D.data.sum(1) - 1).max())
        assert dev <= D.tol

    def test_ds_matches_sinkhorn_on_random(self, rng):
        a = rng.random((6, 6)) + 0.05
        a = a + a.T
        np.testing.assert_allclose(doubly_stochastic(SimilarityMatrix(a), tol=1e-12).data,
                                   sinkhorn_oracle(a), atol=1e-9)

    def test_ds_no_convergence(self):
        # bipartite path with unequal sides has no doubly stochastic scaling
        a = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        with pytest.raises(NoConvergence):
            doubly_stochastic(SimilarityMatrix(a), tol=1e-8, max_iter=200)


class TestLaplacian:
    def test_identity_graph(self):
        np.testing.assert_array_equal(laplacian(SimilarityMatrix(np.eye(3))), np.zeros((3, 3)))

    def test_two_by_two(self):
        L = laplacian(SimilarityMatrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
        np.testing.assert_allclose(L, [[1.0, -1.0], [-1.0, 1.0]])

    @settings(max_examples=40, deadline=None)
    @given(features)
    def test_spectrum_in_unit_band(self, X):
        L = laplacian(gaussian_similarity(X, 1.0))
        ev = np.linalg.eigvalsh(L)
        assert ev.min() >= -1e-10
        assert ev.max() <= 2 + 1e-10

    def test_null_vector_on_ds_input(self, rng):
        D = doubly_stochastic(SimilarityMatrix(rng.random((5, 5)) + 0.1), tol=1e-13)
        np.testing.assert_allclose(laplacian(D) @ np.ones(5), 0.0, atol=1e-10)


def test_graph_set_validation():
    a = SimilarityMatrix(np.eye(3))
    with pytest.raises(ValueError):
        MultiViewGraphSet(())
    with pytest.raises(ValueError):
        MultiViewGraphSet((a, SimilarityMatrix(np.eye(4))))
    with pytest.raises(ValueError):
        MultiViewGraphSet((a, symmetric_normalize(a)))


def test_feature_matrix_validation():
    with pytest.raises(ValueError):
        FeatureMatrix(np.ones((1, 3)))
    with pytest.raises(NonFinite):
        FeatureMatrix(np.array([[1.0], [np.inf]]))


def test_build_graphs_pipeline(rng):
    views = build_graphs([rng.standard_normal((20, 3)), rng.standard_normal((20, 2))], knn=5)
    assert views.n_views == 2 and views.n == 20
    for v in views:
        assert v.normalization == "doubly_stochastic"
        assert np.max(np.abs(v.data - v.data.T)) <= 1e-12
        assert np.all(np.abs(v.data.sum(1) - 1) <= v.tol)
