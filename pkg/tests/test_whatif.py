import numpy as np
import pytest
import scipy.linalg

from clusterscope import (
    ConstraintSet,
    ParameterError,
    ValidationError,
    backward_project_constrained,
    backward_project_unconstrained,
    fit_pca,
    forward_project,
    proline,
    proline_all,
)


from test_projection import coordinate_plane_model


def random_model(rng, n=None, d=None):
    n = n or int(rng.integers(5, 30))
    d = d or int(rng.integers(2, 9))
    return fit_pca(rng.normal(size=(n, d)))


class TestForwardProject:
    def test_zero_delta(self):
        model = coordinate_plane_model()
        np.testing.assert_array_equal(forward_project(model, np.zeros(3)), [0.0, 0.0])

    def test_axis_aligned(self):
        model = coordinate_plane_model()
        np.testing.assert_allclose(
            forward_project(model, np.array([0.5, -1.0, 7.0])), [0.5, -1.0], atol=1e-15
        )

    def test_identity_against_projection_difference(self):
        rng = np.random.default_rng(40)
        for _ in range(25):
            model = random_model(rng)
            x = rng.normal(size=model.d)
            dx = rng.normal(size=model.d)
            lhs = model.project(x + dx) - model.project(x)
            rhs = forward_project(model, dx)
            assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            forward_project(coordinate_plane_model(), np.zeros(4))


class TestBackwardUnconstrained:
    def test_zero_delta(self):
        model = coordinate_plane_model()
        np.testing.assert_array_equal(
            backward_project_unconstrained(model, np.zeros(2)), np.zeros(3)
        )

    def test_embeds_into_feature_space(self):
        model = coordinate_plane_model()
        np.testing.assert_allclose(
            backward_project_unconstrained(model, np.array([2.0, 3.0])),
            [2.0, 3.0, 0.0],
            atol=1e-15,
        )

    def test_minimal_norm_among_feasible_alternatives(self):
        rng = np.random.default_rng(41)
        for _ in range(5):
            model = random_model(rng, d=6)
            dy = rng.normal(size=2)
            dx = backward_project_unconstrained(model, dy)
            null = scipy.linalg.null_space(model.E.T)
            for _ in range(1000):
                z = dx + null @ rng.normal(size=null.shape[1])
                np.testing.assert_allclose(z @ model.E, dy, atol=1e-10)
                assert np.linalg.norm(dx) <= np.linalg.norm(z) + 1e-12

    def test_forward_backward_round_trip(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            model = random_model(rng)
            dy = rng.normal(size=2)
            back = backward_project_unconstrained(model, dy)
            assert np.max(np.abs(forward_project(model, back) - dy)) <= 1e-10

    def test_backward_forward_is_rank2_projection(self):
        rng = np.random.default_rng(43)
        for _ in range(25):
            model = random_model(rng)
            dx = rng.normal(size=model.d)
            round_tripped = backward_project_unconstrained(
                model, forward_project(model, dx)
            )
            expected = dx @ model.E @ model.E.T  # component inside span(e0, e1)
            assert np.max(np.abs(round_tripped - expected)) <= 1e-10


class TestBackwardConstrained:
    def test_delegates_to_solver(self):
        model = coordinate_plane_model()
        cons = ConstraintSet(
            C=np.zeros((0, 3)), d_vec=np.zeros(0), lb=-np.ones(3), ub=np.ones(3)
        )
        sol = backward_project_constrained(model, np.array([2.0, 3.0]), cons)
        assert sol.status == "optimal"
        np.testing.assert_allclose(sol.delta_x, [1.0, 1.0, 0.0], atol=1e-9)

    def test_signed_deltas_for_ui(self):
        model = coordinate_plane_model()
        sol = backward_project_constrained(
            model, np.array([-2.0, 3.0]), ConstraintSet.empty(3)
        )
        assert sol.delta_x[0] < 0 < sol.delta_x[1]


class TestProline:
    def test_grid_five_samples(self):
        model = coordinate_plane_model()
        pl = proline(model, np.zeros(3), 0, sigma=2.0, k=1.0, c=0.5)
        np.testing.assert_allclose(pl.param_values, [-2.0, -1.0, 0.0, 1.0, 2.0])

    def test_sample_count_rule(self):
        model = coordinate_plane_model()
        for k, c in [(2.0, 0.25), (1.0, 0.5), (1.0, 0.3), (2.5, 0.8)]:
            pl = proline(model, np.zeros(3), 0, sigma=1.0, k=k, c=c)
            assert len(pl.param_values) == 2 * round(k / c) + 1
            assert len(pl.path) == len(pl.param_values)

    def test_midpoint_is_current_projection(self):
        rng = np.random.default_rng(50)
        model = random_model(rng, d=4)
        x = rng.normal(size=4)
        pl = proline(model, x, 2, sigma=1.3)
        mid = len(pl.path) // 2
        np.testing.assert_allclose(pl.path[mid], model.project(x), atol=1e-12)
        assert pl.param_values[mid] == pytest.approx(x[2])

    def test_paths_are_straight_for_linear_models(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            model = random_model(rng)
            x = rng.normal(size=model.d)
            for i in range(model.d):
                pl = proline(model, x, i, sigma=rng.uniform(0.5, 2.0))
                a, b = pl.path[0], pl.path[-1]
                chord = b - a
                norm = np.linalg.norm(chord)
                for p in pl.path:
                    if norm < 1e-12:
                        deviation = np.linalg.norm(p - a)
                    else:
                        v = p - a
                        deviation = abs(chord[0] * v[1] - chord[1] * v[0]) / norm
                    assert deviation <= 1e-9

    def test_endpoint_minus_midpoint_closed_form(self):
        rng = np.random.default_rng(52)
        model = random_model(rng, d=5)
        x = rng.normal(size=5)
        k, sigma = 2.0, 1.7
        pl = proline(model, x, 1, sigma=sigma, k=k)
        mid = len(pl.path) // 2
        np.testing.assert_allclose(
            pl.path[-1] - pl.path[mid], k * sigma * model.E[1], atol=1e-10
        )

    def test_symmetric_about_midpoint(self):
        rng = np.random.default_rng(53)
        model = random_model(rng, d=3)
        x = rng.normal(size=3)
        pl = proline(model, x, 0, sigma=1.1)
        mid = len(pl.path) // 2
        lhs = pl.path[mid] - pl.path[0]
        rhs = pl.path[-1] - pl.path[mid]
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_degenerate_sigma_flagged(self):
        model = coordinate_plane_model()
        pl = proline(model, np.ones(3), 0, sigma=0.0)
        assert pl.degenerate
        assert pl.length == 0.0
        assert len(pl.path) == 17  # grid shape kept, collapsed onto one point
        np.testing.assert_array_equal(pl.path[0], pl.path[-1])

    def test_parameter_validation(self):
        model = coordinate_plane_model()
        with pytest.raises(ParameterError):
            proline(model, np.zeros(3), 0, sigma=1.0, k=0.0)
        with pytest.raises(ParameterError):
            proline(model, np.zeros(3), 0, sigma=1.0, c=0.0)
        with pytest.raises(ParameterError):
            proline(model, np.zeros(3), 0, sigma=1.0, k=1.0, c=2.0)


class TestProlineAll:
    def test_constant_feature_ranked_last(self):
        model = coordinate_plane_model()
        sigmas = np.array([1.0, 1.0, 0.0])
        # feature 2 has zero variance AND zero loading
        lines = proline_all(model, np.zeros(3), sigmas)
        assert lines[-1].feature_index == 2
        assert lines[-1].degenerate

    def test_tie_keeps_feature_order(self):
        model = coordinate_plane_model(d=2)
        lines = proline_all(model, np.zeros(2), np.array([1.0, 1.0]), k=1.0)
        assert [pl.feature_index for pl in lines] == [0, 1]
        assert lines[0].length == pytest.approx(lines[1].length)

    def test_dominant_feature_ranked_first(self):
        # feature 0 dominates e0; the hand oracle ranks by 2*k*sigma*|E_i|
        rng = np.random.default_rng(54)
        base = rng.normal(size=(40, 3))
        X = base * np.array([10.0, 1.0, 0.5])
        model = fit_pca(X)
        view_sigmas = X.std(axis=0)
        lines = proline_all(model, X[0], view_sigmas, k=2.0)
        expected_order = np.argsort(
            [-2 * 2.0 * s * np.linalg.norm(model.E[i]) for i, s in enumerate(view_sigmas)]
        )
        assert [pl.feature_index for pl in lines] == list(expected_order)

    def test_feature_subset(self):
        model = coordinate_plane_model()
        lines = proline_all(
            model, np.zeros(3), np.ones(3), feature_indices=[2, 0]
        )
        assert {pl.feature_index for pl in lines} == {0, 2}

    def test_json_shape(self):
        model = coordinate_plane_model()
        pl = proline(model, np.zeros(3), 0, sigma=1.0)
        payload = pl.to_json_dict()
        assert set(payload) == {"feature", "params", "path", "length", "degenerate"}
        assert len(payload["path"]) == len(payload["params"])
