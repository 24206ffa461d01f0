"""Parameter choice rules over a regularization path: the Hanke-Raus rule,
the quasi-optimality principle, Morozov's discrepancy principle, oracle
baselines and the auto-regularization ratio diagnostic."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .bregman import bregman_distance, canonical_xi
from .solver import SolverOptions, solve_tikhonov

# our calibration of the "discarded if the monitored residual is deemed too
# small" guard: warn below this fraction of the largest residual on the path
DELTA_STAR_WARN_FRACTION = 1e-3

_ZERO_MU_TOL = 1e-14


@dataclass
class RuleSelection:
    rule: str
    alpha_selected: float
    index: int
    diagnostics: list  # (alpha or k, criterion value) pairs
    delta_star: float | None = None
    warnings: list = field(default_factory=list)

    def to_csv_row(self):
        buf = io.StringIO()
        writer = csv.writer(buf)
        criterion = self.diagnostics[self.index][1] if self.diagnostics else math.nan
        writer.writerow(
            [
                self.rule,
                format(self.alpha_selected, ".17g"),
                format(criterion, ".17g"),
                "" if self.delta_star is None else format(self.delta_star, ".17g"),
                ";".join(self.warnings),
            ]
        )
        return buf.getvalue().strip()

    def write_diagnostics(self, path):
        with open(path, "w") as fh:
            for key, value in self.diagnostics:
                fh.write(f"{key:.17g} {value:.17g}\n")


def hanke_raus(path, K_norm):
    """Choose alpha minimizing residual^2 / alpha over grid points with
    alpha <= ||K||^2; ties break toward the larger alpha.

    The residual at the chosen alpha is recorded and a warning is emitted
    when it is suspiciously small relative to the path's residual range.
    """
    if len(path) == 0:
        raise ValueError("path must be nonempty")
    admissible = [
        k for k, a in enumerate(path.alphas) if a <= K_norm**2 * (1.0 + 1e-12)
    ]
    if not admissible:
        raise ValueError(
            f"no grid point lies in the search interval (0, ||K||^2 = {K_norm**2:.3g}]"
        )
    phis = [
        (float(path.alphas[k]), path.solutions[k].residual_norm ** 2 / path.alphas[k])
        for k in admissible
    ]
    # grid is descending in alpha, so the first argmin is the largest alpha
    best_pos = min(range(len(phis)), key=lambda i: phis[i][1])
    index = admissible[best_pos]
    delta_star = path.solutions[index].residual_norm
    warnings = []
    max_residual = float(max(s.residual_norm for s in path.solutions))
    if delta_star < DELTA_STAR_WARN_FRACTION * max_residual:
        warnings.append(
            "residual at the selected alpha is very small; "
            "the reconstruction may be unreliable"
        )
    return RuleSelection(
        rule="hanke_raus",
        alpha_selected=float(path.alphas[index]),
        index=index,
        diagnostics=phis,
        delta_star=delta_star,
        warnings=warnings,
    )


def quasi_optimality(path, k0=1, R=None, K=None):
    """Choose alpha_k minimizing the Bregman distance between consecutive
    path solutions, over k >= k0; ties break toward smaller k (larger alpha).

    The distance mu_k uses the canonical residual subgradient at the
    solution with the larger alpha. A warning is raised when the minimum
    vanishes (degenerate l1-type case).
    """
    if R is None or K is None:
        raise ValueError("quasi_optimality requires the penalty R and operator K")
    if len(path) < k0 + 2:
        raise ValueError(
            f"path needs at least {k0 + 2} points for k0={k0}, has {len(path)}"
        )
    y = path.data
    mus = []
    for k in range(1, len(path)):
        prev = path.solutions[k - 1]
        cur = path.solutions[k]
        xi_prev = canonical_xi(K, y, prev.alpha, prev.x)
        mu = bregman_distance(R, cur.x, prev.x, xi_prev)
        mus.append((k, mu))
    candidates = [(k, mu) for k, mu in mus if k >= k0]
    index, mu_min = min(candidates, key=lambda km: (km[1], km[0]))
    warnings = []
    if mu_min <= _ZERO_MU_TOL:
        warnings.append(
            "quasi-optimality sequence vanishes at the minimum; "
            "selection is degenerate (typical for pure l1 penalties)"
        )
    return RuleSelection(
        rule="quasi_optimality",
        alpha_selected=float(path.alphas[index]),
        index=index,
        diagnostics=mus,
        warnings=warnings,
    )


def discrepancy_principle(K, y_delta, R, delta, tau=1.0, bracket=None, opts=None):
    """Find alpha with residual(alpha) = tau * delta by bisection on log alpha.

    Relies on the residual being monotonically increasing in alpha. The
    bracket (alpha_lo, alpha_hi) must satisfy residual(alpha_lo) <= tau*delta
    <= residual(alpha_hi); otherwise a descriptive error is raised.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if tau < 1.0:
        raise ValueError("tau must be at least 1")
    if bracket is None:
        raise ValueError("bracket (alpha_lo, alpha_hi) is required")
    opts = opts or SolverOptions()
    y_delta = np.asarray(y_delta, dtype=float)
    alpha_lo, alpha_hi = bracket
    target = tau * delta

    sol_lo = solve_tikhonov(K, y_delta, alpha_lo, R, opts)
    if sol_lo.residual_norm > target * (1.0 + opts.tol):
        raise ValueError(
            f"bracket failure: residual at alpha_lo={alpha_lo:.3g} is "
            f"{sol_lo.residual_norm:.6g} > tau*delta = {target:.6g}"
        )
    sol_hi = solve_tikhonov(K, y_delta, alpha_hi, R, opts, x0=sol_lo.x)
    if sol_hi.residual_norm < target * (1.0 - opts.tol):
        raise ValueError(
            f"bracket failure: residual at alpha_hi={alpha_hi:.3g} is "
            f"{sol_hi.residual_norm:.6g} < tau*delta = {target:.6g}; "
            "the residual may never reach that level"
        )
    diagnostics = [
        (alpha_lo, sol_lo.residual_norm),
        (alpha_hi, sol_hi.residual_norm),
    ]
    lo, hi = math.log(alpha_lo), math.log(alpha_hi)
    alpha = alpha_hi
    sol = sol_hi
    for _ in range(200):
        if abs(sol.residual_norm - target) <= opts.tol * 1e3 * target:
            break
        mid = 0.5 * (lo + hi)
        alpha = math.exp(mid)
        sol = solve_tikhonov(K, y_delta, alpha, R, opts, x0=sol.x)
        diagnostics.append((alpha, sol.residual_norm))
        if sol.residual_norm > target:
            hi = mid
        else:
            lo = mid
    selection = RuleSelection(
        rule="discrepancy",
        alpha_selected=float(alpha),
        index=len(diagnostics) - 1,
        diagnostics=diagnostics,
        delta_star=sol.residual_norm,
    )
    selection.solution = sol
    return selection


def oracle_best(path, x_dagger, xi_dagger, metric="bregman", R=None):
    """Grid argmin of the error to the known exact solution.

    metric "bregman" uses the Bregman distance with the supplied subgradient
    at x_dagger; metric "norm" uses the Euclidean distance. Ties break
    toward the larger alpha.
    """
    x_dagger = np.asarray(x_dagger, dtype=float)
    if metric == "bregman":
        if R is None:
            raise ValueError("metric='bregman' requires the penalty R")
        values = [
            bregman_distance(R, sol.x, x_dagger, xi_dagger)
            for sol in path.solutions
        ]
        rule = "oracle_bregman"
    elif metric == "norm":
        values = [float(np.linalg.norm(sol.x - x_dagger)) for sol in path.solutions]
        rule = "oracle_norm"
    else:
        raise ValueError(f"unknown metric {metric!r}")
    index = min(range(len(values)), key=lambda k: (values[k], k))
    return RuleSelection(
        rule=rule,
        alpha_selected=float(path.alphas[index]),
        index=index,
        diagnostics=list(zip(map(float, path.alphas), values)),
    )


def autoreg_ratio(path_noisy, path_exact, R, K):
    """Largest r such that the noisy data satisfies the discrete
    auto-regularization condition on the computed grid.

    Returns min_k |mu_k - mu_k_exact| / D(x_k_noisy, x_k_exact); pairs with
    zero denominator and zero numerator are excluded (all excluded gives
    +inf), while a positive denominator with zero numerator gives 0.
    """
    if len(path_noisy) != len(path_exact) or not np.allclose(
        path_noisy.alphas, path_exact.alphas, rtol=1e-12
    ):
        raise ValueError("paths must share the same alpha grid")
    y_delta = path_noisy.data
    y_dagger = path_exact.data
    ratios = []
    for k in range(1, len(path_noisy)):
        prev_n, cur_n = path_noisy.solutions[k - 1], path_noisy.solutions[k]
        prev_e, cur_e = path_exact.solutions[k - 1], path_exact.solutions[k]
        mu = bregman_distance(
            R, cur_n.x, prev_n.x, canonical_xi(K, y_delta, prev_n.alpha, prev_n.x)
        )
        mu_exact = bregman_distance(
            R, cur_e.x, prev_e.x, canonical_xi(K, y_dagger, prev_e.alpha, prev_e.x)
        )
        denom = bregman_distance(
            R, cur_n.x, cur_e.x, canonical_xi(K, y_dagger, cur_e.alpha, cur_e.x)
        )
        numer = abs(mu - mu_exact)
        if denom <= 0.0:
            continue  # 0/0 excluded; treated as +inf
        ratios.append(numer / denom)
    if not ratios:
        return math.inf
    return float(min(ratios))
