"""Bregman distances with canonical subgradient choices, the
approximation/data/total error decomposition along a regularization path,
and runnable checks of all the convergence-analysis inequalities."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

# bounds hold for exact minimizers; inexact solves inflate the slack by
# GAP_INFLATION * gap * ||x difference||
GAP_INFLATION = 10.0

_NONNEG_SLACK = 1e-10


def bregman_distance(R, x_to, x_from, xi, check_subgradient=False, check_tol=1e-6):
    """D_xi(x_to, x_from) = R(x_to) - R(x_from) - <xi, x_to - x_from>.

    xi must be a subgradient of R at x_from (caller-guaranteed; verified to
    check_tol when check_subgradient is set). The value is nonnegative up to
    numerical slack; anything more negative signals an invalid subgradient.
    """
    x_to = np.asarray(x_to, dtype=float)
    x_from = np.asarray(x_from, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if check_subgradient:
        dist = R.subgradient_distance(x_from, xi)
        if dist > check_tol * (1.0 + np.linalg.norm(xi)):
            raise ValueError(
                f"xi is not a subgradient of R at x_from (distance {dist:.3g})"
            )
    d = R.value(x_to) - R.value(x_from) - float(np.dot(xi, x_to - x_from))
    scale = 1.0 + abs(R.value(x_to)) + abs(R.value(x_from))
    if d < -_NONNEG_SLACK * scale - GAP_INFLATION * R.subgradient_distance(
        x_from, xi
    ) * np.linalg.norm(x_to - x_from):
        raise ValueError(
            f"negative Bregman distance {d:.3g}: xi is not a valid subgradient"
        )
    return d


def canonical_xi(K, y, alpha, x):
    """The residual-based subgradient -K*(Kx - y)/alpha.

    At a converged Tikhonov minimizer this lies in the subdifferential of R
    up to solver tolerance.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return -K.apply_adjoint(K.apply(x) - np.asarray(y, dtype=float)) / alpha


def splitting_identity_check(R, x_dagger, xi_dagger, x_mid, xi_mid, x_to):
    """Absolute defect of the three-point Bregman splitting identity

    D_xi(x_to, x_dagger) = D_zeta(x_to, x_mid) + D_xi(x_mid, x_dagger)
                           + <xi - zeta, x_mid - x_to>.
    """
    x_dagger = np.asarray(x_dagger, dtype=float)
    x_mid = np.asarray(x_mid, dtype=float)
    x_to = np.asarray(x_to, dtype=float)
    xi_dagger = np.asarray(xi_dagger, dtype=float)
    xi_mid = np.asarray(xi_mid, dtype=float)

    def _raw(xp, x, xi):
        return R.value(xp) - R.value(x) - float(np.dot(xi, xp - x))

    lhs = _raw(x_to, x_dagger, xi_dagger)
    rhs = (
        _raw(x_to, x_mid, xi_mid)
        + _raw(x_mid, x_dagger, xi_dagger)
        + float(np.dot(xi_dagger - xi_mid, x_mid - x_to))
    )
    return abs(lhs - rhs)


@dataclass
class ErrorRow:
    alpha: float
    approx_error: float
    approx_bound: float
    approx_disc: float
    approx_disc_bound: float
    data_error: float
    data_bound: float
    data_disc: float
    data_disc_bound: float
    total_error: float
    total_bound: float
    total_disc: float
    total_disc_bound: float
    splitting_defect: float  # signed: total - (approx + data)
    splitting_bound: float
    phi: float
    pair_error: float  # consecutive-solution Bregman distance, nan on last row
    pair_error_bound: float
    pair_disc: float
    pair_disc_bound: float
    gap_noisy: float
    gap_exact: float
    inflation: float


_CSV_FIELDS = [f for f in ErrorRow.__dataclass_fields__]


@dataclass
class ErrorReport:
    rows: list
    delta: float
    w_norm: float
    q: float

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_FIELDS)
            for row in self.rows:
                writer.writerow(
                    [format(getattr(row, f), ".17g") for f in _CSV_FIELDS]
                )

    def write_curves(self, out_dir, columns=None):
        """One two-column whitespace .dat file per requested column."""
        from pathlib import Path

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        alphas = self.column("alpha")
        for name in columns or _CSV_FIELDS[1:]:
            values = self.column(name)
            with open(out_dir / f"{name}.dat", "w") as fh:
                for a, v in zip(alphas, values):
                    fh.write(f"{a:.17g} {v:.17g}\n")


def build_error_report(K, R, path_noisy, path_exact, x_dagger, w, delta):
    """Populate per-alpha error and bound columns along aligned paths.

    Subgradient conventions: xi = K*w at the minimum-penalty solution,
    the canonical residual subgradient at each exact-data solution, and
    the canonical residual subgradient at each noisy-data solution.
    """
    if len(path_noisy) != len(path_exact) or not np.allclose(
        path_noisy.alphas, path_exact.alphas, rtol=1e-12
    ):
        raise ValueError("paths must share the same alpha grid")
    x_dagger = np.asarray(x_dagger, dtype=float)
    w = np.asarray(w, dtype=float)
    y_delta = path_noisy.data
    y_dagger = path_exact.data
    xi = K.apply_adjoint(w)
    w_norm = float(np.linalg.norm(w))
    q = path_noisy.q

    rows = []
    n_pts = len(path_noisy)
    for k in range(n_pts):
        alpha = float(path_noisy.alphas[k])
        sol_n = path_noisy.solutions[k]
        sol_e = path_exact.solutions[k]
        x_n, x_e = sol_n.x, sol_e.x

        xi_alpha = canonical_xi(K, y_dagger, alpha, x_e)
        approx_error = bregman_distance(R, x_e, x_dagger, xi)
        data_error = bregman_distance(R, x_n, x_e, xi_alpha)
        total_error = bregman_distance(R, x_n, x_dagger, xi)

        approx_disc = float(np.linalg.norm(K.apply(x_e) - y_dagger))
        data_disc = float(np.linalg.norm(K.apply(x_n - x_e)))
        total_disc = sol_n.residual_norm

        if k + 1 < n_pts:
            sol_next = path_noisy.solutions[k + 1]
            xi_n = canonical_xi(K, y_delta, alpha, x_n)
            pair_error = bregman_distance(R, sol_next.x, x_n, xi_n)
            pair_error_bound = (1.0 - q) ** 2 * total_disc**2 / (2.0 * alpha * q)
            pair_disc = float(np.linalg.norm(K.apply(sol_next.x - x_n)))
            pair_disc_bound = 2.0 * (1.0 - q) * (delta + 2.0 * alpha * w_norm)
        else:
            pair_error = pair_error_bound = pair_disc = pair_disc_bound = np.nan

        diff_scale = (
            np.linalg.norm(x_n - x_dagger)
            + np.linalg.norm(x_e - x_dagger)
            + np.linalg.norm(x_n - x_e)
        )
        inflation = GAP_INFLATION * (
            sol_n.optimality_gap + sol_e.optimality_gap
        ) * diff_scale

        rows.append(
            ErrorRow(
                alpha=alpha,
                approx_error=approx_error,
                approx_bound=0.5 * w_norm**2 * alpha,
                approx_disc=approx_disc,
                approx_disc_bound=2.0 * w_norm * alpha,
                data_error=data_error,
                data_bound=delta**2 / (2.0 * alpha),
                data_disc=data_disc,
                data_disc_bound=2.0 * delta,
                total_error=total_error,
                total_bound=0.5
                * (delta / np.sqrt(alpha) + np.sqrt(alpha) * w_norm) ** 2,
                total_disc=total_disc,
                total_disc_bound=delta + 2.0 * alpha * w_norm,
                splitting_defect=total_error - (approx_error + data_error),
                splitting_bound=6.0 * w_norm * delta,
                phi=total_disc**2 / alpha,
                pair_error=pair_error,
                pair_error_bound=pair_error_bound,
                pair_disc=pair_disc,
                pair_disc_bound=pair_disc_bound,
                gap_noisy=sol_n.optimality_gap,
                gap_exact=sol_e.optimality_gap,
                inflation=inflation,
            )
        )
    return ErrorReport(rows=rows, delta=float(delta), w_norm=w_norm, q=float(q))


_CHECKS = [
    ("approx_error <= ||w||^2 alpha / 2", "approx_error", "approx_bound"),
    ("approx_disc <= 2 ||w|| alpha", "approx_disc", "approx_disc_bound"),
    ("data_error <= delta^2/(2 alpha)", "data_error", "data_bound"),
    ("data_disc <= 2 delta", "data_disc", "data_disc_bound"),
    ("total_error <= (delta/sqrt(alpha) + sqrt(alpha)||w||)^2 / 2",
     "total_error", "total_bound"),
    ("total_disc <= delta + 2 alpha ||w||", "total_disc", "total_disc_bound"),
    ("|splitting defect| <= 6 ||w|| delta", "splitting_defect", "splitting_bound"),
    ("pair_error <= (1-q)^2 residual^2 / (2 alpha q)",
     "pair_error", "pair_error_bound"),
    ("pair_disc <= 2(1-q)(delta + 2 alpha ||w||)", "pair_disc", "pair_disc_bound"),
]


@dataclass
class Violation:
    inequality: str
    alpha: float
    lhs: float
    rhs: float


def check_estimates(report, slack=1e-6):
    """Return the list of inequality violations in the report.

    Empty iff every estimate holds within the relative slack plus the
    solver-gap inflation recorded per row.
    """
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    violations = []
    for row in report.rows:
        for name, lhs_col, rhs_col in _CHECKS:
            lhs = getattr(row, lhs_col)
            rhs = getattr(row, rhs_col)
            if np.isnan(lhs) or np.isnan(rhs):
                continue
            if lhs_col == "splitting_defect":
                lhs = abs(lhs)
            allowed = rhs * (1.0 + slack) + row.inflation + 1e-14
            if lhs > allowed:
                violations.append(
                    Violation(inequality=name, alpha=row.alpha, lhs=lhs, rhs=rhs)
                )
    return violations
