import copy

import numpy as np
import pytest

from convexreg.bregman import (
    bregman_distance,
    build_error_report,
    canonical_xi,
    check_estimates,
    splitting_identity_check,
)
from convexreg.linops import DenseOperator, make_circular_convolution, \
    make_haar_synthesis, compose
from convexreg.penalty import ElasticNet, L1, LpPower, Quadratic
from convexreg.problems import add_noise, construct_source_solution, \
    default_w_profile
from convexreg.solver import SolverOptions, solve_path


class TestBregmanDistance:
    def test_same_point_is_zero(self):
        R = LpPower(1.2)
        x = np.array([1.0, -2.0])
        assert bregman_distance(R, x, x, R.subgradient(x)) == 0.0

    def test_l1_colinear_vanishes_for_distinct_points(self):
        # distinct points with zero distance: the l1 degenerate case
        R = L1()
        d = bregman_distance(R, np.array([2.0, 0.0]), np.array([1.0, 0.0]),
                             np.array([1.0, 0.0]))
        assert d == 0.0

    def test_elastic_net_hand_value(self):
        R = ElasticNet(0.001)
        d = bregman_distance(R, np.array([-1.0]), np.array([1.0]),
                             np.array([1.001]))
        assert np.isclose(d, 2.002)

    def test_invalid_subgradient_detected(self):
        R = LpPower(1.5)
        with pytest.raises(ValueError):
            bregman_distance(R, np.array([1.0]), np.array([2.0]),
                             np.array([99.0]), check_subgradient=True)

    def test_nonnegative_with_valid_subgradients(self):
        R = LpPower(1.2)
        rng = np.random.default_rng(8)
        for _ in range(50):
            x_from = rng.standard_normal(4)
            x_to = rng.standard_normal(4)
            d = bregman_distance(R, x_to, x_from, R.subgradient(x_from))
            assert d >= -1e-10 * (1 + abs(R.value(x_to)) + abs(R.value(x_from)))


class TestCanonicalXi:
    def test_zero_residual(self):
        K = DenseOperator(np.eye(3))
        x = np.array([1.0, 2.0, 3.0])
        assert np.all(canonical_xi(K, x, 0.5, x) == 0.0)

    def test_quadratic_closed_form(self):
        # K=I, y=2, alpha=1, eta=1: minimizer x=1, xi = -(1-2)/1 = 1 = eta*x
        K = DenseOperator(np.eye(1))
        xi = canonical_xi(K, np.array([2.0]), 1.0, np.array([1.0]))
        assert np.allclose(xi, [1.0])

    def test_alpha_scaling(self):
        K = DenseOperator(np.array([[2.0, 0.0], [1.0, 1.0]]))
        y = np.array([1.0, -1.0])
        x = np.array([0.3, 0.7])
        assert np.allclose(canonical_xi(K, y, 2.0, x),
                           0.5 * canonical_xi(K, y, 1.0, x))

    def test_alpha_positive_required(self):
        K = DenseOperator(np.eye(2))
        with pytest.raises(ValueError):
            canonical_xi(K, np.ones(2), 0.0, np.ones(2))


class TestSplittingIdentity:
    def test_collapsed_midpoint(self):
        R = ElasticNet(0.5)
        rng = np.random.default_rng(0)
        x_d = rng.standard_normal(4)
        x_to = rng.standard_normal(4)
        xi = R.subgradient(x_d)
        defect = splitting_identity_check(R, x_d, xi, x_d, xi, x_to)
        assert defect <= 1e-12

    def test_all_points_equal(self):
        R = L1()
        x = np.array([1.0, -1.0])
        xi = R.subgradient(x)
        assert splitting_identity_check(R, x, xi, x, xi, x) <= 1e-14

    def test_random_elastic_net_triples(self):
        R = ElasticNet(0.3)
        rng = np.random.default_rng(17)
        for _ in range(20):
            x_d, x_mid, x_to = rng.standard_normal((3, 5))
            defect = splitting_identity_check(
                R, x_d, R.subgradient(x_d), x_mid, R.subgradient(x_mid), x_to)
            assert defect <= 1e-10


def small_report(delta=0.02, n=64, count=12, seed=3):
    w = default_w_profile(n)
    A = compose(make_circular_convolution(n, 0.2), make_haar_synthesis(n))
    R = LpPower(1.2)
    xi, x_dagger = construct_source_solution(A, w, 1.2)
    y_dagger = A.apply(x_dagger)
    y_delta = add_noise(y_dagger, delta, seed)
    opts = SolverOptions()
    alpha0 = 0.04
    path_noisy = solve_path(A, y_delta, R, alpha0, 0.8, count, opts)
    path_exact = solve_path(A, y_dagger, R, alpha0, 0.8, count, opts)
    report = build_error_report(A, R, path_noisy, path_exact, x_dagger, w,
                                delta)
    return report


class TestErrorReport:
    def test_zero_noise_collapses_data_error(self):
        report = small_report(delta=0.0, count=8)
        assert np.all(report.column("data_error") <= 1e-8)
        assert np.all(np.abs(report.column("splitting_defect")) <= 1e-8)

    def test_all_bounds_hold_on_deconvolution(self):
        report = small_report()
        assert check_estimates(report, slack=1e-6) == []

    def test_pairwise_bound_columns_populated(self):
        report = small_report(count=8)
        pair = report.column("pair_error")
        assert np.isnan(pair[-1]) and not np.any(np.isnan(pair[:-1]))

    def test_corrupted_row_is_flagged(self):
        report = small_report(count=8)
        bad = copy.deepcopy(report)
        row = bad.rows[3]
        row.data_error = row.data_bound * 2.0 + 1.0
        violations = check_estimates(bad, slack=1e-6)
        assert len(violations) == 1
        assert "data_error" in violations[0].inequality
        assert violations[0].alpha == row.alpha

    def test_grid_mismatch_rejected(self):
        n = 32
        A = make_haar_synthesis(n)
        R = Quadratic()
        y = np.random.default_rng(0).standard_normal(n)
        p1 = solve_path(A, y, R, 1.0, 0.5, 4)
        p2 = solve_path(A, y, R, 2.0, 0.5, 4)
        with pytest.raises(ValueError):
            build_error_report(A, R, p1, p2, np.zeros(n), np.zeros(n), 0.0)

    def test_csv_and_curves_serialization(self, tmp_path):
        report = small_report(count=6)
        report.to_csv(tmp_path / "report.csv")
        text = (tmp_path / "report.csv").read_text().splitlines()
        assert text[0].startswith("alpha,approx_error")
        assert len(text) == 7
        report.write_curves(tmp_path, columns=["total_error"])
        lines = (tmp_path / "total_error.dat").read_text().splitlines()
        assert len(lines) == 6
        assert len(lines[0].split()) == 2


class TestClosedFormReport:
    def test_exact_quadratic_problem_has_no_violations(self):
        # n=2 dense K, quadratic R: solutions in closed form, so all
        # estimates must hold with essentially no solver slack
        K = DenseOperator(np.array([[1.0, 0.2], [0.0, 0.5]]))
        eta = 1.0
        R = Quadratic(eta)
        w = np.array([0.4, -0.3])
        xi = K.apply_adjoint(w)
        x_dagger = xi / eta  # eta*x = xi  <=>  xi in dR(x)
        y_dagger = K.apply(x_dagger)
        delta = 0.05
        y_delta = add_noise(y_dagger, delta, 1)
        opts = SolverOptions(tol=1e-12)
        path_n = solve_path(K, y_delta, R, 1.0, 0.7, 10, opts)
        path_e = solve_path(K, y_dagger, R, 1.0, 0.7, 10, opts)
        report = build_error_report(K, R, path_n, path_e, x_dagger, w, delta)
        assert check_estimates(report, slack=1e-6) == []
