"""Command-line front end: four canned experiments plus ad-hoc problem
synthesis, path solving, rule selection and error reports.

All numeric output is written with 17 significant digits so reruns with the
same config and seed are byte-identical. Exit codes: 0 success, 1 numerical
failure or estimate violation, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bregman import bregman_distance, build_error_report, check_estimates
from .linops import operator_norm
from .penalty import L1, ElasticNet, LpPower
from .problems import ProblemInstance, add_noise, blur_problem, \
    deconvolution_problem, default_w_profile
from .rules import discrepancy_principle, hanke_raus, oracle_best, \
    quasi_optimality
from .solver import PathSolveError, SolverOptions, solve_path


class ConfigError(ValueError):
    pass


def _fmt(x):
    return format(float(x), ".17g")


def _write_dat(path, xs, ys):
    with open(path, "w") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{_fmt(x)} {_fmt(y)}\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) if isinstance(c, str) else _fmt(c)
                              for c in row) + "\n")


def _load_config(args, defaults):
    """Merge defaults <- JSON config file <- explicit CLI flags."""
    config = dict(defaults)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise ConfigError(
                f"unknown config fields: {', '.join(sorted(unknown))}"
            )
        config.update(loaded)
    if args.seed is not None:
        config["seed"] = args.seed
    for field in ("n", "N", "p", "delta", "width", "q", "count", "band",
                  "sigma", "eta", "tau", "k0"):
        value = getattr(args, field.lower(), None)
        if value is not None and field in defaults:
            config[field] = value
    _validate_config(config)
    return config


def _validate_config(config):
    positive = ("p", "width", "q", "sigma", "tau")
    for field in positive:
        if field in config and not config[field] > 0:
            raise ConfigError(f"config field {field!r} must be positive")
    for field in ("n", "N", "count", "band", "seed", "k0", "num_deltas"):
        if field in config and int(config[field]) != config[field]:
            raise ConfigError(f"config field {field!r} must be an integer")
    if "delta" in config and config["delta"] < 0:
        raise ConfigError("config field 'delta' must be nonnegative")
    if "q" in config and not 0 < config["q"] < 1:
        raise ConfigError("config field 'q' must lie in (0, 1)")


def _out_dir(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sweep_grid(K_norm, w_norm, delta, q):
    """Geometric alpha grid from ||K||^2 down to about 0.2*delta/||w||,
    bracketing the expected optimum delta/||w|| with a margin on both
    sides."""
    alpha0 = K_norm**2
    alpha_min = 0.2 * delta / w_norm
    count = max(2, int(math.ceil(math.log(alpha0 / alpha_min)
                                 / math.log(1.0 / q))) + 1)
    return alpha0, count


def cmd_experiment1(args):
    """Error estimates along an alpha grid for the deconvolution problem:
    emits the error and bound curves plus a violations report."""
    config = _load_config(args, {
        "n": 512, "p": 1.2, "delta": 0.02, "width": 0.2, "seed": 0,
        "alpha_max": 1.0, "alpha_min": 1e-4, "count": 40,
    })
    out = _out_dir(args)
    problem = deconvolution_problem(
        n=config["n"], p=config["p"], delta=config["delta"],
        seed=config["seed"], width=config["width"], measure_epsilon=False,
    )
    count = int(config["count"])
    q = (config["alpha_min"] / config["alpha_max"]) ** (1.0 / (count - 1))
    opts = SolverOptions(operator_norm=operator_norm(problem.K))
    path_noisy = solve_path(problem.K, problem.y_delta, problem.R,
                            config["alpha_max"], q, count, opts)
    path_exact = solve_path(problem.K, problem.y_dagger, problem.R,
                            config["alpha_max"], q, count, opts)
    report = build_error_report(problem.K, problem.R, path_noisy, path_exact,
                                problem.x_dagger, problem.w, problem.delta)
    report.write_curves(out)
    report.to_csv(out / "report.csv")
    violations = check_estimates(report, slack=1e-6)
    with open(out / "violations.txt", "w") as fh:
        for v in violations:
            fh.write(f"{v.inequality} alpha={_fmt(v.alpha)} "
                     f"lhs={_fmt(v.lhs)} rhs={_fmt(v.rhs)}\n")
    if violations:
        print(f"{len(violations)} estimate violations; see "
              f"{out / 'violations.txt'}", file=sys.stderr)
        return 1
    print(f"experiment1: {count} alphas, no violations; output in {out}")
    return 0


def _sweep_one(problem_zero, K_norm, w_norm, delta, seed, q, rule_name, k0):
    y_delta = add_noise(problem_zero.y_dagger, delta, seed)
    alpha0, count = _sweep_grid(K_norm, w_norm, delta, q)
    opts = SolverOptions(operator_norm=K_norm)
    path = solve_path(problem_zero.K, y_delta, problem_zero.R,
                      alpha0, q, count, opts)
    if rule_name == "hanke_raus":
        selection = hanke_raus(path, K_norm)
    else:
        selection = quasi_optimality(path, k0, R=problem_zero.R,
                                     K=problem_zero.K)
    oracle = oracle_best(path, problem_zero.x_dagger, problem_zero.xi_dagger,
                         "bregman", R=problem_zero.R)
    err_rule = bregman_distance(problem_zero.R,
                                path.solutions[selection.index].x,
                                problem_zero.x_dagger, problem_zero.xi_dagger)
    err_oracle = bregman_distance(problem_zero.R,
                                  path.solutions[oracle.index].x,
                                  problem_zero.x_dagger,
                                  problem_zero.xi_dagger)
    return (delta, selection.alpha_selected, err_rule,
            oracle.alpha_selected, err_oracle)


def _cmd_sweep(args, rule_name):
    config = _load_config(args, {
        "n": 128, "p": 1.2, "width": 0.2, "seed": 0, "q": 0.8,
        "delta_min": 1e-4, "delta_max": 1e-1, "num_deltas": 12, "k0": 1,
    })
    out = _out_dir(args)
    problem = deconvolution_problem(
        n=config["n"], p=config["p"], delta=0.0, seed=config["seed"],
        width=config["width"], measure_epsilon=False,
    )
    K_norm = operator_norm(problem.K)
    w_norm = float(np.linalg.norm(problem.w))
    deltas = np.logspace(math.log10(config["delta_min"]),
                         math.log10(config["delta_max"]),
                         int(config["num_deltas"]))
    jobs = [
        (problem, K_norm, w_norm, float(d), config["seed"] + 1 + i,
         config["q"], rule_name, int(config["k0"]))
        for i, d in enumerate(deltas)
    ]
    if args.threads and args.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(args.threads) as pool:
            rows = list(pool.map(lambda j: _sweep_one(*j), jobs))
    else:
        rows = [_sweep_one(*job) for job in jobs]

    _write_dat(out / "alpha_vs_delta.dat", [r[0] for r in rows],
               [r[1] for r in rows])
    _write_dat(out / "error_vs_delta.dat", [r[0] for r in rows],
               [r[2] for r in rows])
    _write_dat(out / "alpha_oracle_vs_delta.dat", [r[0] for r in rows],
               [r[3] for r in rows])
    _write_dat(out / "error_oracle_vs_delta.dat", [r[0] for r in rows],
               [r[4] for r in rows])
    _write_csv(out / "sweep.csv",
               ["delta", "alpha_rule", "error_rule", "alpha_oracle",
                "error_oracle"], rows)
    worst = max(r[2] / r[4] for r in rows)
    print(f"{rule_name} sweep over {len(rows)} noise levels; worst "
          f"rule/oracle error ratio {worst:.3g}; output in {out}")
    return 0


def cmd_experiment2(args):
    """Hanke-Raus rule versus the oracle across a noise-level sweep."""
    return _cmd_sweep(args, "hanke_raus")


def cmd_experiment3(args):
    """Quasi-optimality principle versus the oracle across a sweep."""
    return _cmd_sweep(args, "quasi_optimality")


def cmd_experiment4(args):
    """Deblurring comparison table: both heuristics, the discrepancy
    principle and the two oracles on the separable blur problem."""
    config = _load_config(args, {
        "N": 50, "band": 5, "sigma": 1.2, "eta": 1e-3, "delta": 0.1,
        "seed": 0, "q": 0.8, "alpha_max": 1e-1, "alpha_min": 1e-4,
        "k0": 1, "tau": 1.0,
    })
    out = _out_dir(args)
    problem = blur_problem(N=config["N"], band=config["band"],
                           sigma=config["sigma"], eta=config["eta"],
                           delta=config["delta"], seed=config["seed"])
    K_norm = operator_norm(problem.K)
    opts = SolverOptions(operator_norm=K_norm)
    alpha0 = config["alpha_max"]
    count = int(math.ceil(math.log(config["alpha_min"] / alpha0)
                          / math.log(config["q"]))) + 1
    path = solve_path(problem.K, problem.y_delta, problem.R,
                      alpha0, config["q"], count, opts)
    # no source element here; distances from x-dagger use the subgradient
    # selection of the penalty at x-dagger
    xi = problem.R.subgradient(problem.x_dagger)
    selections = {
        "oracle_bregman": oracle_best(path, problem.x_dagger, xi,
                                      "bregman", R=problem.R),
        "oracle_norm": oracle_best(path, problem.x_dagger, xi, "norm"),
        "hanke_raus": hanke_raus(path, K_norm),
        "quasi_optimality": quasi_optimality(path, int(config["k0"]),
                                             R=problem.R, K=problem.K),
    }
    solutions = {name: path.solutions[sel.index]
                 for name, sel in selections.items()}
    disc = discrepancy_principle(
        problem.K, problem.y_delta, problem.R, problem.delta,
        tau=config["tau"],
        bracket=(path.alphas[-1], alpha0), opts=opts,
    )
    selections["discrepancy"] = disc
    solutions["discrepancy"] = disc.solution

    rows = []
    order = ["oracle_bregman", "oracle_norm", "hanke_raus",
             "quasi_optimality", "discrepancy"]
    for name in order:
        sol = solutions[name]
        rows.append((name,
                     selections[name].alpha_selected,
                     bregman_distance(problem.R, sol.x, problem.x_dagger, xi),
                     float(np.linalg.norm(sol.x - problem.x_dagger))))
    _write_csv(out / "table.csv",
               ["rule", "alpha", "bregman_distance", "norm_error"], rows)
    N = config["N"]
    problem.x_dagger.astype("<f8").tofile(out / "truth.f64")
    problem.y_delta.astype("<f8").tofile(out / "data.f64")
    for name in order:
        solutions[name].x.astype("<f8").tofile(out / f"recon_{name}.f64")
    if args.png:
        _write_png_grids(out, N, problem, solutions, order)
    print(f"experiment4: table and {len(order)} reconstructions "
          f"({N}x{N}, column-major float64) in {out}")
    return 0


def _write_png_grids(out, N, problem, solutions, order):
    try:
        from PIL import Image
    except ImportError:
        print("PNG export skipped: Pillow not installed", file=sys.stderr)
        return
    grids = {"truth": problem.x_dagger, "data": problem.y_delta}
    grids.update({f"recon_{name}": solutions[name].x for name in order})
    for name, flat in grids.items():
        img = flat.reshape(N, N, order="F")
        lo, hi = img.min(), img.max()
        scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
        Image.fromarray((255 * scaled).astype(np.uint8)).save(
            out / f"{name}.png")


def cmd_synthesize(args):
    """Build a synthetic problem instance and save it to a directory."""
    if args.problem == "deconvolution":
        config = _load_config(args, {
            "n": 512, "p": 1.2, "delta": 0.02, "width": 0.2, "seed": 0,
        })
        problem = deconvolution_problem(
            n=config["n"], p=config["p"], delta=config["delta"],
            seed=config["seed"], width=config["width"],
        )
    else:
        config = _load_config(args, {
            "N": 50, "band": 5, "sigma": 1.2, "eta": 1e-3, "delta": 0.1,
            "seed": 0,
        })
        problem = blur_problem(N=config["N"], band=config["band"],
                               sigma=config["sigma"], eta=config["eta"],
                               delta=config["delta"], seed=config["seed"])
    out = _out_dir(args)
    problem.save(out)
    print(f"saved {args.problem} problem to {out}")
    return 0


def _path_grid_from_args(args, K_norm, delta):
    alpha0 = args.alpha0 if args.alpha0 is not None else K_norm**2
    q = args.q if args.q is not None else 0.8
    count = args.count if args.count is not None else 40
    return alpha0, q, count


def cmd_solve_path(args):
    """Solve a regularization path for a saved problem and dump it."""
    problem = ProblemInstance.load(args.problem_dir)
    K_norm = operator_norm(problem.K)
    alpha0, q, count = _path_grid_from_args(args, K_norm, problem.delta)
    opts = SolverOptions(operator_norm=K_norm)
    path = solve_path(problem.K, problem.y_delta, problem.R,
                      alpha0, q, count, opts)
    out = _out_dir(args)
    rows = [
        (s.alpha, s.residual_norm, s.penalty_value, s.objective,
         float(s.iterations), s.optimality_gap)
        for s in path.solutions
    ]
    _write_csv(out / "path.csv",
               ["alpha", "residual_norm", "penalty_value", "objective",
                "iterations", "optimality_gap"], rows)
    stacked = np.stack([s.x for s in path.solutions])
    stacked.astype("<f8").tofile(out / "solutions.f64")
    print(f"solved {count}-point path (alpha0={_fmt(alpha0)}, q={_fmt(q)}); "
          f"output in {out}")
    return 0


def cmd_select(args):
    """Run a parameter choice rule on a saved problem; prints a CSV row."""
    problem = ProblemInstance.load(args.problem_dir)
    K_norm = operator_norm(problem.K)
    alpha0, q, count = _path_grid_from_args(args, K_norm, problem.delta)
    opts = SolverOptions(operator_norm=K_norm)
    overrides = [f"{name}={getattr(args, name)}"
                 for name in ("alpha0", "q", "count", "k0", "tau")
                 if getattr(args, name, None) is not None]
    header = "# rule,alpha,criterion,delta_star,warnings"
    if overrides:
        header += "  (overrides: " + " ".join(overrides) + ")"

    if args.rule == "discrepancy":
        if problem.delta <= 0:
            print("discrepancy rule needs a problem with delta > 0",
                  file=sys.stderr)
            return 2
        tau = args.tau if args.tau is not None else 1.0
        selection = discrepancy_principle(
            problem.K, problem.y_delta, problem.R, problem.delta, tau=tau,
            bracket=(alpha0 * q ** (count - 1), alpha0), opts=opts)
    else:
        path = solve_path(problem.K, problem.y_delta, problem.R,
                          alpha0, q, count, opts)
        if args.rule == "hanke_raus":
            selection = hanke_raus(path, K_norm)
        elif args.rule == "quasi_optimality":
            selection = quasi_optimality(path, args.k0 or 1,
                                         R=problem.R, K=problem.K)
        elif args.rule in ("oracle_bregman", "oracle_norm"):
            xi = problem.xi_dagger
            if xi is None:
                xi = problem.R.subgradient(problem.x_dagger)
            selection = oracle_best(path, problem.x_dagger, xi,
                                    args.rule.split("_")[1], R=problem.R)
        else:  # pragma: no cover - argparse restricts choices
            return 2
    print(header)
    print(selection.to_csv_row())
    if args.out:
        out = _out_dir(args)
        selection.write_diagnostics(out / f"{args.rule}_diagnostics.dat")
    return 0


def cmd_report(args):
    """Full error report for a saved problem with a known source element."""
    problem = ProblemInstance.load(args.problem_dir)
    if problem.w is None:
        print("error report needs a problem with a stored source element w",
              file=sys.stderr)
        return 2
    K_norm = operator_norm(problem.K)
    alpha0, q, count = _path_grid_from_args(args, K_norm, problem.delta)
    opts = SolverOptions(operator_norm=K_norm)
    path_noisy = solve_path(problem.K, problem.y_delta, problem.R,
                            alpha0, q, count, opts)
    path_exact = solve_path(problem.K, problem.y_dagger, problem.R,
                            alpha0, q, count, opts)
    report = build_error_report(problem.K, problem.R, path_noisy, path_exact,
                                problem.x_dagger, problem.w, problem.delta)
    out = _out_dir(args)
    report.write_curves(out)
    report.to_csv(out / "report.csv")
    violations = check_estimates(report, slack=1e-6)
    with open(out / "violations.txt", "w") as fh:
        for v in violations:
            fh.write(f"{v.inequality} alpha={_fmt(v.alpha)} "
                     f"lhs={_fmt(v.lhs)} rhs={_fmt(v.rhs)}\n")
    print(f"report over {count} alphas, {len(violations)} violations; "
          f"output in {out}")
    return 1 if violations else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="convexreg",
        description="Convex Tikhonov regularization with heuristic "
                    "parameter choice rules.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="RNG seed override")
    parser.add_argument("--out", help="output directory (default: cwd)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, doc):
        p = sub.add_parser(name, help=doc)
        p.set_defaults(func=func)
        return p

    p1 = add("experiment1", cmd_experiment1,
             "error-estimate curves for sparse deconvolution")
    p1.add_argument("--n", type=int)
    p1.add_argument("--delta", type=float)
    p1.add_argument("--count", type=int)

    for name, func in (("experiment2", cmd_experiment2),
                       ("experiment3", cmd_experiment3)):
        p = add(name, func, "rule-vs-oracle noise sweep")
        p.add_argument("--n", type=int)
        p.add_argument("--q", type=float)

    p4 = add("experiment4", cmd_experiment4, "deblurring comparison table")
    p4.add_argument("--N", dest="n_image", type=int)
    p4.add_argument("--delta", type=float)
    p4.add_argument("--png", action="store_true",
                    help="also write PNG previews (needs Pillow)")

    ps = add("synthesize", cmd_synthesize, "build and save a problem")
    ps.add_argument("problem", choices=["deconvolution", "blur"])
    ps.add_argument("--n", type=int)
    ps.add_argument("--delta", type=float)

    for name, func in (("solve-path", cmd_solve_path),
                       ("select", cmd_select),
                       ("report", cmd_report)):
        p = add(name, func, f"{name.replace('-', ' ')} on a saved problem")
        p.add_argument("problem_dir")
        p.add_argument("--alpha0", type=float)
        p.add_argument("--q", type=float)
        p.add_argument("--count", type=int)
        if name == "select":
            p.add_argument("--rule", required=True,
                           choices=["hanke_raus", "quasi_optimality",
                                    "discrepancy", "oracle_bregman",
                                    "oracle_norm"])
            p.add_argument("--k0", type=int)
            p.add_argument("--tau", type=float)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    # experiment4 exposes --N; argparse stores it as n_image to avoid
    # clashing with the lowercase --n of other subcommands
    if getattr(args, "n_image", None) is not None:
        args.n = args.n_image
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, KeyError) as exc:
        print(f"malformed problem manifest: {exc}", file=sys.stderr)
        return 2
    except PathSolveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
