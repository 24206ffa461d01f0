"""Tikhonov minimization of (1/2)||Kx - y||^2 + alpha R(x) by proximal
gradient descent with optional acceleration, plus warm-started paths over
geometric alpha grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linops import operator_norm


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200_000
    accelerate: bool = True
    # spectral-norm estimate reused across solves on the same operator
    operator_norm: float | None = None
    norm_tol: float = 1e-6


@dataclass
class TikhonovSolution:
    x: np.ndarray
    alpha: float
    residual_norm: float
    penalty_value: float
    objective: float
    iterations: int
    optimality_gap: float
    converged: bool


@dataclass
class RegularizationPath:
    alphas: np.ndarray
    solutions: list
    data: np.ndarray
    q: float

    def __len__(self):
        return len(self.solutions)

    def residuals(self):
        return np.array([s.residual_norm for s in self.solutions])


class PathSolveError(RuntimeError):
    """A path solve failed; carries the index of the failing alpha."""

    def __init__(self, message, index, alpha):
        super().__init__(message)
        self.index = index
        self.alpha = alpha


def optimality_gap(K, y, alpha, R, x):
    """Distance from -K*(Kx - y)/alpha to the subdifferential of R at x.

    Zero exactly at minimizers of the Tikhonov functional; computed in
    closed form per penalty kind.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    v = -K.apply_adjoint(K.apply(x) - y) / alpha
    return R.subgradient_distance(x, v)


def _gap_scale(K, y, alpha):
    return 1.0 + np.linalg.norm(K.apply_adjoint(y)) / alpha


def solve_tikhonov(K, y, alpha, R, opts=None, x0=None):
    """Minimize (1/2)||Kx - y||^2 + alpha R(x).

    Fixed step 1/L with L the squared spectral norm (power-iteration
    estimate inflated by 1.01); no line search, so runs are deterministic.
    Stops when the optimality gap drops below opts.tol scaled by
    (1 + ||K* y|| / alpha). On non-convergence the last iterate is returned
    with converged=False.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    y = np.asarray(y, dtype=float)
    if y.shape != (K.range_dim,):
        raise ValueError(f"expected data of length {K.range_dim}")
    opts = opts or SolverOptions()

    sigma = opts.operator_norm
    if sigma is None:
        sigma = operator_norm(K, tol=opts.norm_tol)
    L = (1.01 * sigma) ** 2
    if L == 0.0:
        L = 1.0
    step = 1.0 / L

    x = np.zeros(K.domain_dim) if x0 is None else np.array(x0, dtype=float)
    gap_tol = opts.tol * _gap_scale(K, y, alpha)

    z = x.copy()
    t_accel = 1.0
    Kx = K.apply(x)
    obj = 0.5 * np.dot(Kx - y, Kx - y) + alpha * R.value(x)
    gap = R.subgradient_distance(x, -K.apply_adjoint(Kx - y) / alpha)
    iterations = 0
    while gap > gap_tol and iterations < opts.max_iter:
        iterations += 1
        Kz = K.apply(z)
        grad = K.apply_adjoint(Kz - y)
        x_new = R.prox(z - step * grad, step * alpha)
        Kx_new = K.apply(x_new)
        r_new = Kx_new - y
        obj_new = 0.5 * np.dot(r_new, r_new) + alpha * R.value(x_new)

        if opts.accelerate and obj_new > obj:
            # restart acceleration: redo the step from x without momentum
            t_accel = 1.0
            grad = K.apply_adjoint(Kx - y)
            x_new = R.prox(x - step * grad, step * alpha)
            Kx_new = K.apply(x_new)
            r_new = Kx_new - y
            obj_new = 0.5 * np.dot(r_new, r_new) + alpha * R.value(x_new)

        if opts.accelerate:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_accel**2))
            z = x_new + ((t_accel - 1.0) / t_next) * (x_new - x)
            t_accel = t_next
        else:
            z = x_new

        x, Kx, obj = x_new, Kx_new, obj_new
        gap = R.subgradient_distance(x, -K.apply_adjoint(Kx - y) / alpha)

    residual_norm = float(np.linalg.norm(Kx - y))
    penalty_value = R.value(x)
    return TikhonovSolution(
        x=x,
        alpha=float(alpha),
        residual_norm=residual_norm,
        penalty_value=penalty_value,
        objective=0.5 * residual_norm**2 + alpha * penalty_value,
        iterations=iterations,
        optimality_gap=float(gap),
        converged=bool(gap <= gap_tol),
    )


def solve_path(K, y, R, alpha0, q, count, opts=None):
    """Solve along the geometric grid alpha_k = alpha0 * q^k, k = 0..count-1.

    Each solve is warm-started from the previous solution (alphas descend,
    so warm starts follow the path from strong to weak regularization).
    """
    if alpha0 <= 0:
        raise ValueError("alpha0 must be positive")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if count < 2:
        raise ValueError("count must be at least 2")
    opts = opts or SolverOptions()
    if opts.operator_norm is None:
        opts = SolverOptions(
            tol=opts.tol,
            max_iter=opts.max_iter,
            accelerate=opts.accelerate,
            operator_norm=operator_norm(K, tol=opts.norm_tol),
            norm_tol=opts.norm_tol,
        )
    y = np.asarray(y, dtype=float)
    alphas = alpha0 * q ** np.arange(count)
    solutions = []
    x_prev = None
    for k, alpha in enumerate(alphas):
        try:
            sol = solve_tikhonov(K, y, alpha, R, opts, x0=x_prev)
        except Exception as exc:  # propagate with the failing index
            raise PathSolveError(
                f"solve failed at alpha index {k} (alpha={alpha:.6g}): {exc}",
                k,
                alpha,
            ) from exc
        solutions.append(sol)
        x_prev = sol.x
    return RegularizationPath(alphas=alphas, solutions=solutions, data=y, q=float(q))
