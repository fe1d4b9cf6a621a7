import numpy as np
import pytest

from clusterscope import (
    OperationCancelled,
    ParameterError,
    ValidationError,
    agglomerative,
    cluster_profile,
    kmeans,
    load_csv,
    normalize,
    wcss,
)

from oracles import best_wcss_by_enumeration, labels_to_partition, mst_cut_components

POINTS_1D = np.array([[0.0], [1.0], [10.0], [11.0]])
SPREAD_1D = np.array([[0.0], [1.0], [3.0], [7.0]])


class TestKmeans:
    def test_k1_centroid_is_column_means(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(9, 3))
        model = kmeans(X, 1, seed=0)
        assert set(model.labels.tolist()) == {0}
        np.testing.assert_allclose(model.centroids[0], X.mean(axis=0), atol=1e-12)

    def test_two_well_separated_clusters(self):
        model = kmeans(POINTS_1D, 2, seed=0)
        assert wcss(POINTS_1D, model.labels, model.centroids) == pytest.approx(1.0)
        # oracle: exhaustive enumeration of all 2-partitions
        assert best_wcss_by_enumeration(POINTS_1D, 2) == pytest.approx(1.0)
        assert labels_to_partition(model.labels) == {
            frozenset({0, 1}),
            frozenset({2, 3}),
        }
        assert sorted(model.centroids[:, 0].tolist()) == [0.5, 10.5]

    def test_k_equals_n_zero_wcss(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(6, 2))
        model = kmeans(X, 6, seed=3)
        assert wcss(X, model.labels, model.centroids) == pytest.approx(0.0, abs=1e-20)
        assert sorted(model.labels.tolist()) == list(range(6))

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            kmeans(POINTS_1D, 5)
        with pytest.raises(ParameterError):
            kmeans(POINTS_1D, 0)

    def test_objective_nonincreasing_every_iteration(self):
        rng = np.random.default_rng(2)
        for trial in range(20):
            X = rng.normal(size=(rng.integers(8, 40), rng.integers(1, 5)))
            model = kmeans(X, int(rng.integers(2, 6)), seed=trial)
            hist = np.array(model.iteration_objectives)
            assert np.all(np.diff(hist) <= 1e-9)

    def test_fixpoint_is_single_swap_stable(self):
        # with centroids held fixed, no single-point relabeling lowers WCSS
        rng = np.random.default_rng(3)
        for trial in range(10):
            X = rng.normal(size=(12, 2))
            model = kmeans(X, 3, seed=trial)
            base = wcss(X, model.labels, model.centroids)
            for i in range(12):
                for c in range(3):
                    if c == model.labels[i]:
                        continue
                    alt = model.labels.copy()
                    alt[i] = c
                    assert wcss(X, alt, model.centroids) >= base - 1e-9

    def test_seed_determinism(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(30, 4))
        a = kmeans(X, 4, seed=11)
        b = kmeans(X, 4, seed=11)
        np.testing.assert_array_equal(a.labels, b.labels)
        assert a.centroids.tobytes() == b.centroids.tobytes()

    def test_manhattan_uses_median_centroids(self):
        X = np.array([[0.0], [1.0], [10.0]])
        model = kmeans(X, 1, distance="manhattan", seed=0)
        assert model.centroids[0, 0] == 1.0  # median, not the mean 11/3

    def test_manhattan_cost_nonincreasing(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(25, 3))
        model = kmeans(X, 3, distance="manhattan", seed=9)
        hist = np.array(model.iteration_objectives)
        assert np.all(np.diff(hist) <= 1e-9)

    def test_unknown_distance(self):
        with pytest.raises(ParameterError):
            kmeans(POINTS_1D, 2, distance="cosine")

    def test_cluster_order_by_descending_size(self):
        X = np.vstack([np.zeros((5, 2)), np.ones((2, 2)) * 10])
        model = kmeans(X, 2, seed=0)
        sizes = model.cluster_sizes()
        order = list(model.cluster_order)
        assert sizes[order[0]] == 5 and sizes[order[1]] == 2

    def test_cancellation(self):
        with pytest.raises(OperationCancelled):
            kmeans(POINTS_1D, 2, cancel=lambda: True)


class TestWcss:
    def test_singletons_zero(self):
        X = np.array([[1.0], [5.0]])
        assert wcss(X, np.array([0, 1]), X.copy()) == 0.0

    def test_k1_two_points(self):
        X = np.array([[0.0], [2.0]])
        assert wcss(X, np.array([0, 0]), np.array([[1.0]])) == pytest.approx(2.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            wcss(np.zeros((3, 2)), np.zeros(2, dtype=int), np.zeros((1, 2)))


class TestAgglomerative:
    def test_single_linkage_heights_and_cut(self):
        model = agglomerative(SPREAD_1D, 2, linkage="single")
        assert [h for _, _, h in model.merge_history] == [1.0, 2.0, 4.0]
        assert labels_to_partition(model.labels) == {
            frozenset({0, 1, 2}),
            frozenset({3}),
        }

    def test_complete_linkage_heights(self):
        model = agglomerative(SPREAD_1D, 2, linkage="complete")
        assert [h for _, _, h in model.merge_history] == [1.0, 3.0, 7.0]

    def test_k_equals_n(self):
        model = agglomerative(SPREAD_1D, 4, linkage="single")
        assert sorted(model.labels.tolist()) == [0, 1, 2, 3]

    def test_ward_requires_euclidean(self):
        with pytest.raises(ParameterError):
            agglomerative(SPREAD_1D, 2, distance="manhattan", linkage="ward")

    @pytest.mark.parametrize("linkage", ["single", "complete", "average", "ward"])
    def test_merge_heights_nondecreasing(self, linkage):
        rng = np.random.default_rng(6)
        for trial in range(10):
            X = rng.normal(size=(rng.integers(4, 16), 3))
            model = agglomerative(X, 1, linkage=linkage)
            heights = [h for _, _, h in model.merge_history]
            assert all(b >= a - 1e-12 for a, b in zip(heights, heights[1:]))

    def test_single_linkage_equals_mst_cut(self):
        rng = np.random.default_rng(7)
        for trial in range(50):
            n = int(rng.integers(3, 11))
            k = int(rng.integers(1, n + 1))
            X = rng.normal(size=(n, int(rng.integers(1, 4))))
            model = agglomerative(X, k, linkage="single")
            expected = {frozenset(c) for c in mst_cut_components(X, k)}
            assert labels_to_partition(model.labels) == expected

    def test_labels_in_range_and_nonempty(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(12, 2))
        for k in (1, 3, 72 % 12):
            k = max(k, 1)
            model = agglomerative(X, k, linkage="average")
            sizes = model.cluster_sizes()
            assert len(sizes) == k and np.all(sizes > 0)

    def test_cancellation(self):
        with pytest.raises(OperationCancelled):
            agglomerative(SPREAD_1D, 1, cancel=lambda: True)

    def test_labels_invariant_under_uniform_rescaling(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(14, 3))
        for linkage in ("single", "complete", "average", "ward"):
            base = agglomerative(X, 3, linkage=linkage)
            scaled = agglomerative(X * 7.5, 3, linkage=linkage)
            np.testing.assert_array_equal(base.labels, scaled.labels)

    def test_per_feature_rescaling_can_change_clusters(self):
        # feature scaling changes euclidean geometry; the sensitivity is
        # real and surfaced rather than hidden by internal normalization
        X = np.array([[0.0, 0.0], [1.0, 10.0], [2.0, 0.5], [3.0, 10.5]])
        base = agglomerative(X, 2, linkage="single")
        squashed = agglomerative(X * np.array([1.0, 0.01]), 2, linkage="single")
        assert not np.array_equal(base.labels, squashed.labels)


class TestClusterProfile:
    def _table(self, csv: bytes):
        return load_csv(csv)

    def test_k1_profile_is_overall_normalized_means(self):
        t = self._table(b"id,a,b\nr1,0,10\nr2,5,20\nr3,10,30")
        view = t.default_view()
        model = kmeans(view.matrix(), 1, seed=0)
        profile = cluster_profile(model, view)
        expected = normalize(view, "minmax").mean(axis=0)
        np.testing.assert_allclose(profile.matrix[:, 0], expected, atol=1e-12)

    def test_largest_cluster_first(self):
        rows = ["id,a"] + [f"r{i},{v}" for i, v in enumerate([0, 1, 2, 100, 101, 102, 103, 104])]
        t = self._table("\n".join(rows).encode())
        view = t.default_view()
        model = kmeans(view.matrix(), 2, seed=0)
        profile = cluster_profile(model, view)
        assert profile.sizes[0] == 5 and profile.sizes[1] == 3

    def test_minmax_endpoint_cell(self):
        # row r3 holds the maximum of feature a and sits alone in its cluster
        t = self._table(b"id,a\nr1,0\nr2,1\nr3,10")
        view = t.default_view()
        model = kmeans(view.matrix(), 2, seed=0)
        profile = cluster_profile(model, view)
        singleton_col = profile.sizes.index(1)
        assert profile.matrix[0, singleton_col] == pytest.approx(1.0)

    def test_every_cell_in_unit_interval(self):
        rng = np.random.default_rng(9)
        lines = ["id," + ",".join(f"f{j}" for j in range(4))]
        for i in range(30):
            lines.append(f"r{i}," + ",".join(repr(float(v)) for v in rng.normal(size=4)))
        t = self._table("\n".join(lines).encode())
        view = t.default_view()
        model = kmeans(view.matrix(), 4, seed=2)
        profile = cluster_profile(model, view)
        assert profile.matrix.min() >= 0.0 and profile.matrix.max() <= 1.0

    def test_shape_mismatch_rejected(self):
        t = self._table(b"id,a\nr1,0\nr2,1\nr3,10")
        view = t.default_view()
        model = kmeans(view.matrix(), 2, seed=0)
        smaller = view.with_row_mask(np.array([True, True, False]))
        with pytest.raises(ValidationError):
            cluster_profile(model, smaller)
