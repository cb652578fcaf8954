import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvongc.errors import CTooLarge, DimensionMismatch, LengthMismatch, MethodRequiresSquare, NonFinite
from mvongc.labels import (
    accuracy,
    assign_from_embedding,
    fit_labeler,
    hungarian,
    kmeans,
    pairwise_f1,
    row_normalize,
)
from mvongc.solver import EmbeddingPair

from oracles import assignment_bruteforce, best_accuracy_bruteforce, pairwise_f1_enumerate

label_pairs = st.integers(2, 30).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 4), min_size=n, max_size=n),
        st.lists(st.integers(0, 4), min_size=n, max_size=n),
    )
)


def partition_inertia(X, assign):
    total = 0.0
    for k in np.unique(assign):
        pts = X[assign == k]
        total += ((pts - pts.mean(0)) ** 2).sum()
    return total


class TestKMeans:
    def test_each_point_own_cluster(self, rng):
        X = rng.standard_normal((5, 2))
        labels, model = kmeans(X, 5, seed=0)
        assert len(np.unique(labels)) == 5
        assert model.inertia == pytest.approx(0.0, abs=1e-20)

    def test_separated_groups(self):
        X = np.array([[0.0], [0.1], [10.0], [10.1]])
        labels, _ = kmeans(X, 2, seed=3)
        assert labels[0] == labels[1] != labels[2] == labels[3]

    def test_matches_exhaustive_two_partition(self):
        X = np.array([[0.0, 0.0], [1.0, 0.2], [0.3, 1.1], [5.0, 5.0],
                      [6.0, 5.5], [5.2, 6.1], [2.5, 2.4], [0.8, 0.6]])
        best = min(
            partition_inertia(X, np.array((0,) + bits))
            for bits in itertools.product((0, 1), repeat=7)
            if 1 in bits
        )
        _, model = kmeans(X, 2, seed=0, restarts=10)
        assert model.inertia == pytest.approx(best, rel=1e-12)

    def test_inertia_history_nonincreasing(self, rng):
        X = rng.standard_normal((200, 3))
        for seed in range(5):
            _, model = kmeans(X, 6, seed=seed, restarts=1)
            assert np.all(np.diff(model.history) <= 1e-12)

    def test_deterministic(self, rng):
        X = rng.standard_normal((50, 2))
        a, ma = kmeans(X, 4, seed=7)
        b, mb = kmeans(X, 4, seed=7)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(ma.centroids, mb.centroids)

    def test_duplicate_points_fill_all_clusters(self):
        X = np.array([[0.0], [0.0], [0.0], [1.0]])
        labels, _ = kmeans(X, 3, seed=0)
        assert labels.shape == (4,)

    def test_too_many_clusters(self):
        with pytest.raises(CTooLarge):
            kmeans(np.zeros((3, 2)), 4)

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            kmeans(np.array([[np.nan], [0.0]]), 1)


class TestAssign:
    def test_argmax_recovers_indicator(self):
        labels = np.array([2, 0, 1, 1, 0, 2])
        G = np.zeros((6, 3))
        G[np.arange(6), labels] = [0.7, 0.5, 0.3, 0.3, 0.5, 0.7]
        E = EmbeddingPair(G.copy(), G)
        np.testing.assert_array_equal(assign_from_embedding(E, 3, "argmax_g"), labels)

    def test_zero_row_goes_to_first_label(self):
        G = np.array([[0.0, 0.0], [0.1, 0.4]])
        np.testing.assert_array_equal(assign_from_embedding(EmbeddingPair(G, G), 2, "argmax_g"), [0, 1])

    def test_argmax_needs_square(self):
        F = np.ones((4, 3))
        with pytest.raises(MethodRequiresSquare):
            assign_from_embedding(EmbeddingPair(F, F), 2, "argmax_g")

    def test_default_method(self, rng):
        F = np.abs(rng.standard_normal((20, 4)))
        labels = assign_from_embedding(EmbeddingPair(F, F), 2)
        assert set(np.unique(labels)) <= {0, 1}

    def test_row_normalize_leaves_zero_rows(self):
        F = np.array([[3.0, 4.0], [0.0, 0.0]])
        np.testing.assert_allclose(row_normalize(F), [[0.6, 0.8], [0.0, 0.0]])

    def test_kmeans_labeler_is_frozen(self, rng):
        F = np.vstack([rng.normal([5, 0], 0.1, (10, 2)), rng.normal([0, 5], 0.1, (10, 2))])
        labels, labeler = fit_labeler(F, 2, "kmeans_f", seed=0)
        np.testing.assert_array_equal(labeler(F), labels)
        np.testing.assert_array_equal(labeler(np.repeat(F[:1], 4, axis=0)), np.repeat(labels[0], 4))


class TestAccuracy:
    def test_identity(self):
        assert accuracy([0, 1, 1, 2], [0, 1, 1, 2]) == 1.0

    def test_relabeling(self):
        t = np.array([0, 0, 1, 2, 2, 1])
        assert accuracy(np.array([2, 0, 1])[t], t) == 1.0

    def test_hand_case(self):
        pred = [0, 0, 1, 1, 2, 2]
        truth = [1, 1, 1, 0, 0, 2]
        assert best_accuracy_bruteforce(pred, truth) == pytest.approx(4 / 6)
        assert accuracy(pred, truth) == pytest.approx(4 / 6, abs=0)

    def test_unequal_cluster_counts(self):
        assert accuracy([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5
        assert accuracy([0, 1, 2, 3], [0, 0, 1, 1]) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            accuracy([0, 1], [0])

    @settings(max_examples=100, deadline=None)
    @given(label_pairs)
    def test_matches_bruteforce(self, pair):
        pred, truth = map(np.asarray, pair)
        assert accuracy(pred, truth) == best_accuracy_bruteforce(pred, truth)


class TestPairwiseF1:
    def test_identity(self):
        assert pairwise_f1([0, 0, 1, 2], [0, 0, 1, 2]) == 1.0

    def test_singletons(self):
        assert pairwise_f1([0, 1, 2, 3], [0, 0, 1, 1]) == 0.0

    def test_hand_case(self):
        assert pairwise_f1_enumerate([0, 0, 1, 1], [0, 0, 0, 1]) == pytest.approx(0.4)
        assert pairwise_f1([0, 0, 1, 1], [0, 0, 0, 1]) == pytest.approx(0.4, abs=1e-15)

    def test_needs_two_samples(self):
        with pytest.raises(LengthMismatch):
            pairwise_f1([0], [0])

    @settings(max_examples=100, deadline=None)
    @given(label_pairs)
    def test_matches_enumeration_and_is_invariant(self, pair):
        pred, truth = map(np.asarray, pair)
        f1 = pairwise_f1(pred, truth)
        assert f1 == pytest.approx(pairwise_f1_enumerate(pred, truth), abs=1e-15)
        assert pairwise_f1((pred + 3) % 5, truth) == f1
        assert pairwise_f1(pred, pred) == 1.0 or len(np.unique(pred)) == len(pred)


class TestHungarian:
    def test_identity_on_zero_diagonal(self):
        np.testing.assert_array_equal(hungarian(1.0 - np.eye(4)), np.arange(4))

    def test_unique_zero_permutation(self):
        perm = np.array([2, 0, 3, 1])
        cost = np.ones((4, 4))
        cost[np.arange(4), perm] = 0.0
        np.testing.assert_array_equal(hungarian(cost), perm)

    def test_matches_factorial_bruteforce(self, rng):
        for _ in range(5):
            cost = rng.random((6, 6))
            perm = hungarian(cost)
            best, _ = assignment_bruteforce(cost)
            assert cost[np.arange(6), perm].sum() == pytest.approx(best, abs=1e-12)

    def test_beats_random_permutations(self, rng):
        cost = rng.random((9, 9))
        got = cost[np.arange(9), hungarian(cost)].sum()
        for _ in range(10000):
            p = rng.permutation(9)
            assert got <= cost[np.arange(9), p].sum() + 1e-12

    def test_rejects_bad_input(self):
        with pytest.raises(DimensionMismatch):
            hungarian(np.ones((2, 3)))
        with pytest.raises(NonFinite):
            hungarian(np.array([[np.inf, 0.0], [0.0, 0.0]]))
