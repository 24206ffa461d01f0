import numpy as np
import pytest
from sklearn.base import clone

from convexreg.estimator import TikhonovRegressor
from convexreg.linops import make_haar_synthesis
from convexreg.penalty import LpPower


def test_fixed_alpha_quadratic_closed_form():
    X = np.eye(3)
    y = np.array([1.0, 2.0, 3.0])
    est = TikhonovRegressor(penalty="quadratic", eta=1.0, rule=None, alpha=0.5)
    est.fit(X, y)
    assert np.allclose(est.coef_, y / 1.5, atol=1e-8)
    assert np.allclose(est.predict(X), est.coef_)
    assert est.alpha_ == 0.5


def test_rule_based_fit_sets_selection():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 10))
    y = X @ (np.eye(10)[0] * 2.0) + 0.01 * rng.standard_normal(20)
    est = TikhonovRegressor(penalty="l1", rule="hanke_raus", n_alphas=25)
    est.fit(X, y)
    assert est.selection_.rule == "hanke_raus"
    assert est.alpha_ == est.selection_.alpha_selected
    assert len(est.path_) == 25
    assert est.coef_.shape == (10,)


def test_discrepancy_rule_requires_delta():
    X = np.eye(2)
    y = np.ones(2)
    with pytest.raises(ValueError):
        TikhonovRegressor(rule="discrepancy").fit(X, y)
    est = TikhonovRegressor(penalty="quadratic", eta=1.0, rule="discrepancy",
                            delta=0.1, n_alphas=60)
    est.fit(X, y)
    sol_residual = np.linalg.norm(X @ est.coef_ - y)
    assert np.isclose(sol_residual, 0.1, rtol=1e-3)


def test_accepts_linear_operator_and_penalty_instance():
    op = make_haar_synthesis(16)
    y = op.apply(np.eye(16)[0])
    est = TikhonovRegressor(penalty=LpPower(1.5), rule="quasi_optimality",
                            n_alphas=15)
    est.fit(op, y)
    assert est.coef_.shape == (16,)


def test_sklearn_protocol():
    est = TikhonovRegressor(rule="hanke_raus", n_alphas=12)
    params = est.get_params()
    assert params["rule"] == "hanke_raus"
    cloned = clone(est)
    assert cloned.get_params() == params


def test_unknown_rule_and_penalty_rejected():
    X, y = np.eye(2), np.ones(2)
    with pytest.raises(ValueError):
        TikhonovRegressor(rule="lucky_guess").fit(X, y)
    with pytest.raises(ValueError):
        TikhonovRegressor(penalty="ridge").fit(X, y)
    with pytest.raises(ValueError):
        TikhonovRegressor(rule=None).fit(X, y)  # needs alpha
