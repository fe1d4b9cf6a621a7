import numpy as np
import pytest

from clusterscope import (
    ConstraintSet,
    ParameterError,
    ValidationError,
    check_kkt,
    solve_bp_qp,
)

from oracles import qp_objective, random_orthonormal_frame, sample_feasible_points

COORD_E = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
DELTA_Y = np.array([2.0, 3.0])
LAM = 1e-6


def unconstrained(d=3):
    return ConstraintSet.empty(d)


class TestFixtures:
    def test_unconstrained_separable(self):
        sol = solve_bp_qp(COORD_E, DELTA_Y)
        expected = np.array([2.0, 3.0, 0.0]) / (1.0 + LAM)
        assert sol.status == "optimal"
        np.testing.assert_allclose(sol.delta_x, expected, atol=1e-9)

    def test_equality_pins_first_coordinate(self):
        cons = ConstraintSet(
            C=np.array([[1.0, 0.0, 0.0]]),
            d_vec=np.array([0.0]),
            lb=np.full(3, -np.inf),
            ub=np.full(3, np.inf),
        )
        sol = solve_bp_qp(COORD_E, DELTA_Y, cons)
        expected = np.array([0.0, 3.0 / (1.0 + LAM), 0.0])
        assert sol.status == "optimal"
        np.testing.assert_allclose(sol.delta_x, expected, atol=1e-9)
        # the residual lands entirely on the pinned axis
        assert sol.objective == pytest.approx(4.0, abs=1e-4)

    def test_box_clips_both_targets(self):
        cons = ConstraintSet(
            C=np.zeros((0, 3)),
            d_vec=np.zeros(0),
            lb=-np.ones(3),
            ub=np.ones(3),
        )
        sol = solve_bp_qp(COORD_E, DELTA_Y, cons)
        assert sol.status == "optimal"
        np.testing.assert_allclose(sol.delta_x, [1.0, 1.0, 0.0], atol=1e-9)
        assert sol.active_upper == (0, 1)
        # oracle: 1e-3-grid brute force over the box agrees
        grid = np.linspace(-1.0, 1.0, 2001)
        best0 = grid[np.argmin((grid - 2.0) ** 2 + LAM * grid**2)]
        best1 = grid[np.argmin((grid - 3.0) ** 2 + LAM * grid**2)]
        assert (best0, best1) == (1.0, 1.0)


class TestCheckKkt:
    def test_exact_solution_tiny_residual(self):
        sol = solve_bp_qp(COORD_E, DELTA_Y)
        assert check_kkt(COORD_E, DELTA_Y, unconstrained(), LAM, sol.delta_x) <= 1e-9

    def test_perturbed_free_coordinate(self):
        sol = solve_bp_qp(COORD_E, DELTA_Y)
        x = sol.delta_x.copy()
        x[0] += 0.1
        assert check_kkt(COORD_E, DELTA_Y, unconstrained(), LAM, x) >= 0.01

    def test_infeasible_point_dominates(self):
        cons = ConstraintSet(
            C=np.zeros((0, 3)), d_vec=np.zeros(0), lb=np.zeros(3), ub=np.ones(3)
        )
        x = np.array([-0.5, 0.5, 0.5])  # violates lb by 0.5
        assert check_kkt(COORD_E, DELTA_Y, cons, LAM, x) >= 0.5


class TestConstraintSet:
    def test_bounds_must_nest(self):
        with pytest.raises(ValidationError):
            ConstraintSet(
                C=np.zeros((0, 2)), d_vec=np.zeros(0),
                lb=np.array([1.0, 0.0]), ub=np.array([0.0, 1.0]),
            )

    def test_dependent_rows_rejected(self):
        with pytest.raises(ValidationError):
            ConstraintSet(
                C=np.array([[1.0, 0.0], [2.0, 0.0]]),
                d_vec=np.zeros(2),
                lb=np.full(2, -np.inf),
                ub=np.full(2, np.inf),
            )

    def test_more_equalities_than_dims_rejected(self):
        with pytest.raises(ValidationError):
            ConstraintSet(
                C=np.array([[1.0], [2.0]]),
                d_vec=np.zeros(2),
                lb=np.array([-np.inf]),
                ub=np.array([np.inf]),
            )

    def test_from_json_dict(self):
        cons = ConstraintSet.from_json_dict(
            {
                "equalities": [{"coeffs": {"a": 1.0}, "rhs": 2.0}],
                "bounds": [{"feature": "b", "lb": -1.0, "ub": 1.0}, {"feature": "c", "ub": 5.0}],
            },
            ["a", "b", "c"],
        )
        np.testing.assert_array_equal(cons.C, [[1.0, 0.0, 0.0]])
        assert cons.d_vec.tolist() == [2.0]
        assert cons.lb.tolist() == [-np.inf, -1.0, -np.inf]
        assert cons.ub.tolist() == [np.inf, 1.0, 5.0]

    def test_from_json_unknown_feature(self):
        with pytest.raises(ValidationError):
            ConstraintSet.from_json_dict(
                {"bounds": [{"feature": "zzz", "lb": 0}]}, ["a"]
            )


class TestSolver:
    def test_infeasible_equality_vs_box(self):
        cons = ConstraintSet(
            C=np.array([[1.0, 0.0]]),
            d_vec=np.array([5.0]),
            lb=np.array([-1.0, -1.0]),
            ub=np.array([1.0, 1.0]),
        )
        sol = solve_bp_qp(np.eye(2), np.array([0.5, 0.5]), cons)
        assert sol.status == "infeasible"

    def test_lambda_must_be_positive(self):
        with pytest.raises(ParameterError):
            solve_bp_qp(COORD_E, DELTA_Y, lambda_reg=0.0)

    def test_lambda_to_zero_converges_to_minimal_norm(self):
        rng = np.random.default_rng(30)
        for _ in range(10):
            d = int(rng.integers(3, 8))
            E = random_orthonormal_frame(rng, d)
            dy = rng.normal(size=2)
            closed_form = dy @ E.T
            for lam in (1e-6, 1e-8):
                sol = solve_bp_qp(E, dy, lambda_reg=lam)
                gap = np.linalg.norm(sol.delta_x - closed_form)
                assert gap <= 10 * lam * np.linalg.norm(dy)

    def test_deterministic(self):
        rng = np.random.default_rng(31)
        E = random_orthonormal_frame(rng, 5)
        dy = rng.normal(size=2)
        cons = ConstraintSet(
            C=np.zeros((0, 5)), d_vec=np.zeros(0),
            lb=-np.ones(5), ub=np.ones(5),
        )
        a = solve_bp_qp(E, dy, cons)
        b = solve_bp_qp(E, dy, cons)
        assert a.delta_x.tobytes() == b.delta_x.tobytes()
        assert a.objective == b.objective

    def _random_case(self, rng: np.random.Generator):
        d = int(rng.integers(2, 7))
        m = int(rng.integers(0, min(3, d)))
        E = random_orthonormal_frame(rng, d)
        dy = rng.normal(size=2) * 2.0
        lb = np.full(d, -np.inf)
        ub = np.full(d, np.inf)
        z0 = rng.normal(size=d)
        for i in range(d):
            if rng.random() < 0.6:
                lb[i] = z0[i] - rng.uniform(0.1, 2.0)
            if rng.random() < 0.6:
                ub[i] = z0[i] + rng.uniform(0.1, 2.0)
        if m > 0:
            C = rng.normal(size=(m, d))
            d_vec = C @ z0  # feasible by construction
        else:
            C, d_vec = np.zeros((0, d)), np.zeros(0)
        return E, dy, ConstraintSet(C=C, d_vec=d_vec, lb=lb, ub=ub)

    def test_random_instances_certified_and_sampled_optimal(self):
        rng = np.random.default_rng(32)
        for _ in range(100):
            E, dy, cons = self._random_case(rng)
            sol = solve_bp_qp(E, dy, cons)
            assert sol.status == "optimal"
            assert sol.kkt_residual <= 1e-6
            if cons.m:
                assert np.max(np.abs(cons.C @ sol.delta_x - cons.d_vec)) <= 1e-8
            assert np.all(sol.delta_x >= cons.lb - 1e-10)
            assert np.all(sol.delta_x <= cons.ub + 1e-10)
            for z in sample_feasible_points(cons, sol.delta_x, rng, 100):
                assert sol.objective <= qp_objective(E, dy, LAM, z) + 1e-9

    def test_thousand_sample_optimality_small_instances(self):
        rng = np.random.default_rng(33)
        for _ in range(10):
            E, dy, cons = self._random_case(rng)
            sol = solve_bp_qp(E, dy, cons)
            assert sol.status == "optimal"
            for z in sample_feasible_points(cons, sol.delta_x, rng, 1000):
                assert sol.objective <= qp_objective(E, dy, LAM, z) + 1e-9

    def test_shape_validation(self):
        with pytest.raises(ValidationError):
            solve_bp_qp(COORD_E, np.array([1.0, 2.0, 3.0]))
        with pytest.raises(ValidationError):
            solve_bp_qp(COORD_E, DELTA_Y, ConstraintSet.empty(4))
