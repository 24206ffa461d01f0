import numpy as np
import pytest

from convexreg.linops import DenseOperator, make_circular_convolution
from convexreg.penalty import L1, LpPower, Quadratic
from convexreg.solver import (
    SolverOptions,
    optimality_gap,
    solve_path,
    solve_tikhonov,
)

RNG = np.random.default_rng(123)


def normal_equations(A, y, alpha, eta):
    """Direct oracle for quadratic R: (A^T A + alpha*eta I) x = A^T y."""
    n = A.shape[1]
    return np.linalg.solve(A.T @ A + alpha * eta * np.eye(n), A.T @ y)


class TestClosedForms:
    def test_identity_quadratic(self):
        K = DenseOperator(np.eye(1))
        sol = solve_tikhonov(K, np.array([2.0]), 1.0, Quadratic(1.0))
        assert np.allclose(sol.x, [1.0], atol=1e-8)
        assert sol.converged

    def test_identity_l1_soft_threshold(self):
        K = DenseOperator(np.eye(1))
        sol = solve_tikhonov(K, np.array([3.0]), 1.0, L1())
        assert np.allclose(sol.x, [2.0], atol=1e-8)

    def test_huge_alpha_annihilates(self):
        K = DenseOperator(RNG.standard_normal((4, 4)))
        y = RNG.standard_normal(4)
        sol = solve_tikhonov(K, y, 1e6 * np.linalg.norm(K.matrix) ** 2,
                             LpPower(1.5))
        assert np.linalg.norm(sol.x) <= 1e-6
        assert np.isclose(sol.residual_norm, np.linalg.norm(y), rtol=1e-6)

    def test_matches_normal_equations(self):
        A = RNG.standard_normal((6, 5))
        y = RNG.standard_normal(6)
        alpha, eta = 0.3, 0.7
        sol = solve_tikhonov(DenseOperator(A), y, alpha, Quadratic(eta))
        oracle = normal_equations(A, y, alpha, eta)
        assert np.linalg.norm(sol.x - oracle) <= 1e-6 * np.linalg.norm(oracle)


class TestSolutionContract:
    def test_objective_consistency(self):
        K = DenseOperator(RNG.standard_normal((5, 5)))
        sol = solve_tikhonov(K, RNG.standard_normal(5), 0.2, LpPower(1.2))
        recomputed = 0.5 * sol.residual_norm**2 + sol.alpha * sol.penalty_value
        assert abs(sol.objective - recomputed) <= 1e-10 * (1 + sol.objective)

    def test_gap_below_tolerance_when_converged(self):
        K = DenseOperator(RNG.standard_normal((4, 4)))
        y = RNG.standard_normal(4)
        opts = SolverOptions(tol=1e-8)
        sol = solve_tikhonov(K, y, 0.1, L1(), opts)
        assert sol.converged
        scale = 1.0 + np.linalg.norm(K.apply_adjoint(y)) / 0.1
        assert sol.optimality_gap <= 1e-8 * scale

    def test_minimizing_property(self):
        K = DenseOperator(RNG.standard_normal((5, 5)))
        y = RNG.standard_normal(5)
        alpha, R = 0.4, LpPower(1.3)
        sol = solve_tikhonov(K, y, alpha, R)
        J = lambda x: 0.5 * np.linalg.norm(K.apply(x) - y) ** 2 + alpha * R.value(x)
        for z in (np.zeros(5), y, RNG.standard_normal(5)):
            assert J(sol.x) <= J(z) * (1 + 1e-8) + 1e-8

    def test_nonconvergence_flagged(self):
        K = DenseOperator(RNG.standard_normal((6, 6)))
        y = RNG.standard_normal(6)
        sol = solve_tikhonov(K, y, 1e-6, LpPower(1.2),
                             SolverOptions(max_iter=3))
        assert not sol.converged

    def test_invalid_alpha(self):
        K = DenseOperator(np.eye(2))
        with pytest.raises(ValueError):
            solve_tikhonov(K, np.ones(2), 0.0, L1())

    def test_dimension_check(self):
        K = DenseOperator(np.ones((3, 2)))
        with pytest.raises(ValueError):
            solve_tikhonov(K, np.ones(2), 1.0, L1())


class TestOptimalityGap:
    def test_zero_at_closed_form_minimizer(self):
        K = DenseOperator(np.eye(1))
        gap = optimality_gap(K, np.array([2.0]), 1.0, Quadratic(1.0),
                             np.array([1.0]))
        assert gap <= 1e-10

    def test_l1_zero_solution(self):
        K = DenseOperator(np.eye(2))
        y = np.array([0.3, -0.2])
        # |K*y|/alpha <= 1 so x=0 is optimal
        assert optimality_gap(K, y, 0.5, L1(), np.zeros(2)) == 0.0

    def test_positive_off_minimizer(self):
        K = DenseOperator(np.eye(1))
        gap = optimality_gap(K, np.array([2.0]), 1.0, Quadratic(1.0),
                             np.array([1.001]))
        assert gap > 0


class TestPaths:
    def test_grid_construction(self):
        K = DenseOperator(np.eye(2))
        path = solve_path(K, np.ones(2), Quadratic(), 1.0, 0.5, 2)
        assert np.allclose(path.alphas, [1.0, 0.5])
        assert len(path) == 2

    def test_geometric_grid_ratio(self):
        K = DenseOperator(np.eye(2))
        path = solve_path(K, np.ones(2), L1(), 2.0, 0.7, 8)
        assert np.allclose(path.alphas, 2.0 * 0.7 ** np.arange(8), rtol=1e-12)

    def test_residual_monotone_in_alpha(self):
        n = 64
        K = make_circular_convolution(n, 0.2)
        y = RNG.standard_normal(n)
        path = solve_path(K, y, LpPower(1.2), 0.05, 0.8, 20)
        res = path.residuals()  # descending alphas -> non-increasing residual
        assert np.all(np.diff(res) <= 1e-8)

    def test_warm_equals_cold_in_objective(self):
        K = DenseOperator(RNG.standard_normal((8, 8)))
        y = RNG.standard_normal(8)
        opts = SolverOptions(tol=1e-10)
        path = solve_path(K, y, LpPower(1.5), 1.0, 0.6, 6, opts)
        for sol in path.solutions:
            cold = solve_tikhonov(K, y, sol.alpha, LpPower(1.5), opts)
            assert abs(sol.objective - cold.objective) <= \
                10 * 1e-10 * (1 + abs(cold.objective))

    def test_invalid_grid_parameters(self):
        K = DenseOperator(np.eye(2))
        with pytest.raises(ValueError):
            solve_path(K, np.ones(2), L1(), -1.0, 0.5, 3)
        with pytest.raises(ValueError):
            solve_path(K, np.ones(2), L1(), 1.0, 1.5, 3)
        with pytest.raises(ValueError):
            solve_path(K, np.ones(2), L1(), 1.0, 0.5, 1)
