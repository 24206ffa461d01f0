"""Scikit-learn style estimator wrapping the Tikhonov path solver and the
parameter choice rules."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .linops import DenseOperator, LinearOperator, operator_norm
from .penalty import ElasticNet, L1, LpPower, Penalty, Quadratic
from .rules import discrepancy_principle, hanke_raus, quasi_optimality
from .solver import SolverOptions, solve_path, solve_tikhonov


def _as_operator(X):
    if isinstance(X, LinearOperator):
        return X
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a LinearOperator or a 2-d array")
    return DenseOperator(X)


def _make_penalty(penalty, p, eta):
    if isinstance(penalty, Penalty):
        return penalty
    if penalty == "lp_power":
        return LpPower(p)
    if penalty == "l1":
        return L1()
    if penalty == "elastic_net":
        return ElasticNet(eta)
    if penalty == "quadratic":
        return Quadratic(eta)
    raise ValueError(f"unknown penalty {penalty!r}")


class TikhonovRegressor(RegressorMixin, BaseEstimator):
    """Solve min_x (1/2)||Kx - y||^2 + alpha R(x) with data-driven alpha.

    Parameters
    ----------
    penalty : str or Penalty, default "lp_power"
        One of "lp_power", "l1", "elastic_net", "quadratic", or a Penalty
        instance.
    p, eta : floats
        Penalty parameters (exponent for lp_power, quadratic weight for
        elastic_net/quadratic); ignored when `penalty` is an instance.
    rule : str or None, default "hanke_raus"
        "hanke_raus", "quasi_optimality", "discrepancy", or None to use the
        fixed `alpha`.
    alpha : float or None
        Regularization parameter when rule is None.
    alpha0, q, n_alphas : geometric alpha-grid parameters for the rule-based
        search; alpha0 defaults to ||K||^2.
    delta, tau : noise level and factor for the discrepancy rule.
    tol, max_iter : solver stopping parameters.

    Attributes after fit: coef_, alpha_, path_, selection_, operator_norm_.
    """

    def __init__(self, penalty="lp_power", p=1.2, eta=1e-3, rule="hanke_raus",
                 alpha=None, alpha0=None, q=0.8, n_alphas=40, delta=None,
                 tau=1.0, tol=1e-8, max_iter=200_000):
        self.penalty = penalty
        self.p = p
        self.eta = eta
        self.rule = rule
        self.alpha = alpha
        self.alpha0 = alpha0
        self.q = q
        self.n_alphas = n_alphas
        self.delta = delta
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        K = _as_operator(X)
        y = np.asarray(y, dtype=float)
        R = _make_penalty(self.penalty, self.p, self.eta)
        norm = operator_norm(K)
        opts = SolverOptions(tol=self.tol, max_iter=self.max_iter,
                             operator_norm=norm)
        self.operator_norm_ = norm
        self.path_ = None
        self.selection_ = None

        if self.rule is None:
            if self.alpha is None:
                raise ValueError("rule=None requires a fixed alpha")
            sol = solve_tikhonov(K, y, self.alpha, R, opts)
        elif self.rule == "discrepancy":
            if self.delta is None:
                raise ValueError("the discrepancy rule requires delta")
            alpha0 = self.alpha0 if self.alpha0 is not None else norm**2
            bracket = (alpha0 * self.q ** (self.n_alphas - 1), alpha0)
            selection = discrepancy_principle(K, y, R, self.delta,
                                              tau=self.tau, bracket=bracket,
                                              opts=opts)
            self.selection_ = selection
            sol = selection.solution
        elif self.rule in ("hanke_raus", "quasi_optimality"):
            alpha0 = self.alpha0 if self.alpha0 is not None else norm**2
            path = solve_path(K, y, R, alpha0, self.q, self.n_alphas, opts)
            self.path_ = path
            if self.rule == "hanke_raus":
                selection = hanke_raus(path, norm)
            else:
                selection = quasi_optimality(path, R=R, K=K)
            self.selection_ = selection
            sol = path.solutions[selection.index]
        else:
            raise ValueError(f"unknown rule {self.rule!r}")

        self.alpha_ = sol.alpha
        self.coef_ = sol.x
        self.solution_ = sol
        self.n_features_in_ = K.domain_dim
        return self

    def predict(self, X):
        return _as_operator(X).apply(self.coef_)
