"""Command-line harness.

Subcommands::

    gen       write a seeded problem instance to PREFIX.{mtx,json}
    solve     run one solver on one problem file, emit a trace CSV
    bench     run an experiment spec (JSON file or preset name)
    simulate  integrate the continuous-time system from a JSON config
    rates     fit a log-log slope on a column of an existing trace CSV

Exit codes: 0 pass, 1 certificate failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, fileio, solver
from .dynamics import OdeConfig, integrate, write_trajectory_csv
from .generators import gen_l1l2, gen_nnls, l1l2_saddle, scalar_instance
from .prox import MoreauParams
from .rates import fit_rate_slope
from .subsolvers import InnerSolverConfig, afbm_baseline, fista_baseline
from .trace import read_trace_csv

EXIT_OK = 0
EXIT_CERT_FAIL = 1
EXIT_CONFIG = 2


def _add_schedule_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rule", default="nesterov",
                   choices=["nesterov", "cd", "ac"],
                   help="extrapolation rule")
    p.add_argument("--alpha", type=float, default=None,
                   help="alpha for the cd/ac rules (>= 3)")
    p.add_argument("--beta0", type=float, default=1.0,
                   help="initial time-scaling value")
    p.add_argument("--beta-power", type=float, default=0.0,
                   help="growth exponent of the time scaling (0 = constant)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inertial-pd", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a problem instance")
    g.add_argument("--kind", required=True, choices=["l1l2", "nnls"])
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mu", type=float, default=1.5)
    g.add_argument("--sparsity", type=float, default=0.05)
    g.add_argument("--noise-norm", type=float, default=1e-6)
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--g", default="nonneg", choices=["nonneg", "zero"],
                   help="regularizer for nnls instances")
    g.add_argument("--rho", type=float, default=1.0,
                   help="default penalty stored with the problem")
    g.add_argument("--saddle", action="store_true",
                   help="also compute and store a saddle certificate (l1l2)")
    g.add_argument("--out", required=True, help="output PREFIX")

    s = sub.add_parser("solve", help="run one solver on one problem file")
    s.add_argument("--problem", required=True, help="problem PREFIX")
    s.add_argument("--solver", default="ipd", choices=["ipd", "fista", "afbm"])
    _add_schedule_args(s)
    s.add_argument("--rho", type=float, default=None,
                   help="override the problem file's default penalty")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--max-iter", type=int, default=100)
    s.add_argument("--stop-tol", type=float, default=0.0)
    s.add_argument("--inner-tol", type=float, default=1e-8)
    s.add_argument("--inner-max", type=int, default=150)
    s.add_argument("--step", type=float, default=None,
                   help="baseline step size (default 1/lipschitz)")
    s.add_argument("--afbm-alpha", type=float, default=5.0)
    s.add_argument("--walltime", action="store_true",
                   help="record wall-clock times (breaks byte-determinism)")
    s.add_argument("--trace", required=True, help="output CSV path")

    b = sub.add_parser("bench", help="run an experiment spec")
    b.add_argument("spec", help="JSON spec file or preset name")
    b.add_argument("--out-dir", default=None)
    b.add_argument("--seed", type=int, default=None, help="override spec seed")
    b.add_argument("--budget", type=int, default=None,
                   help="override iteration budget")
    b.add_argument("--svg", action="store_true", help="emit SVG plots")

    d = sub.add_parser("simulate", help="integrate the continuous-time system")
    d.add_argument("config", help="JSON OdeConfig file")
    d.add_argument("--out", default=None, help="override output CSV path")

    r = sub.add_parser("rates", help="fit a log-log slope on a trace column")
    r.add_argument("trace", help="trace CSV")
    r.add_argument("--column", default="feas_violation")
    r.add_argument("--klo", type=int, required=True)
    r.add_argument("--khi", type=int, required=True)
    return ap


def _cmd_gen(args) -> int:
    if args.kind == "l1l2":
        problem, _ = gen_l1l2(args.m, args.n, mu=args.mu,
                              sparsity=args.sparsity,
                              noise_norm=args.noise_norm, seed=args.seed)
        saddle = l1l2_saddle(problem) if args.saddle else None
        fileio.save_l1l2(problem, args.out, rho=args.rho, saddle=saddle)
    else:
        problem = gen_nnls(args.m, args.n, density=args.density,
                           seed=args.seed, g_kind=args.g)
        fileio.save_problem(problem, args.out, rho=args.rho)
    print(f"wrote {args.out}.mtx and {args.out}.json")
    return EXIT_OK


def _cmd_solve(args) -> int:
    problem, default_rho, saddle = fileio.load_problem(args.problem)
    rho = args.rho if args.rho is not None else default_rho
    if args.solver == "ipd":
        params = solver.SolverParams(
            rho=rho, sigma=args.sigma,
            rule=bench.rule_from_name(args.rule, args.alpha),
            scaling=bench.scaling_from(args.beta0, args.beta_power),
            inner=InnerSolverConfig(subtol=args.inner_tol,
                                    max_inner=args.inner_max),
            max_iter=args.max_iter, stop_tol=args.stop_tol,
            record_walltime=args.walltime)
        trace = solver.run(problem, params, saddle=saddle)
    else:
        if problem.dim_dual:
            target, default_step = bench.surrogate_unconstrained(problem)
            eq_op, eq_rhs = problem.op_A, problem.rhs_b
        else:
            target, eq_op, eq_rhs = problem, None, None
            default_step = 1.0 / max(problem.lipschitz_f, 1e-300)
        step = args.step if args.step is not None else default_step
        ref = saddle.opt_value if saddle is not None else None
        if args.solver == "fista":
            trace = fista_baseline(target, step, args.max_iter, eq_op=eq_op,
                                   eq_rhs=eq_rhs, ref_value=ref,
                                   record_walltime=args.walltime)
        else:
            trace = afbm_baseline(target, step, args.afbm_alpha,
                                  args.max_iter, eq_op=eq_op, eq_rhs=eq_rhs,
                                  ref_value=ref, record_walltime=args.walltime)
    trace.to_csv(args.trace)
    for k, msg in trace.warnings:
        print(f"warning (k={k}): {msg}", file=sys.stderr)
    print(f"wrote {args.trace} ({len(trace)} rows, "
          f"final feas {trace.last('feas_violation'):.3e})")
    return EXIT_OK


def _cmd_bench(args) -> int:
    spec = bench.load_spec(args.spec)
    if args.seed is not None:
        spec["seed"] = args.seed
    if args.budget is not None:
        spec["budget"] = args.budget
    if args.svg:
        spec["svg"] = True
    bundle = bench.run_experiment(spec, out_dir=args.out_dir)
    for name, passed, detail in bundle.certificates:
        print(f"[{'pass' if passed else 'FAIL'}] {name}: {detail}")
    for r in bundle.runs:
        if r.error is not None:
            print(f"[abort] {r.label}: {r.error}")
    print(f"artifacts in {bundle.out_dir}")
    return EXIT_OK if bundle.ok else EXIT_CERT_FAIL


def _cmd_simulate(args) -> int:
    cfg_json = json.loads(Path(args.config).read_text())
    prob_spec = cfg_json.get("problem", "scalar")
    if prob_spec == "scalar":
        problem, saddle = scalar_instance()
    else:
        problem, _, saddle = fileio.load_problem(prob_spec)
    config = OdeConfig(
        alpha=cfg_json.get("alpha", 3.0), rho=cfg_json.get("rho", 1.0),
        beta_scale=cfg_json.get("beta_scale", 1.0),
        beta_power=cfg_json.get("beta_power", 0.0),
        gamma=MoreauParams(cfg_json.get("gamma", 1e-3)),
        t0=cfg_json.get("t0", 1.0), t_end=cfg_json.get("t_end", 50.0),
        step_h=cfg_json.get("step_h", 1e-3),
        stride=int(cfg_json.get("stride", 100)))
    n, m = problem.dim_primal, problem.dim_dual
    records = integrate(
        config, problem,
        x0=cfg_json.get("x0", np.ones(n)), xdot0=cfg_json.get("xdot0"),
        lam0=cfg_json.get("lam0"), lamdot0=cfg_json.get("lamdot0"),
        saddle=saddle)
    out = args.out or cfg_json.get("out", "trajectory.csv")
    write_trajectory_csv(records, out,
                         dump_state=bool(cfg_json.get("dump_state", False)))
    print(f"wrote {out} ({len(records)} records, final t {records[-1].t:g})")
    return EXIT_OK


def _cmd_rates(args) -> int:
    cols = read_trace_csv(args.trace)
    if args.column not in cols:
        raise ValueError(f"column {args.column!r} not in {args.trace}")
    fit = fit_rate_slope(cols[args.column], (args.klo, args.khi),
                         k=cols.get("k"))
    print(f"slope {fit.slope:.6f}  intercept {fit.intercept:.6f}  "
          f"r^2 {fit.r_squared:.6f}  window [{fit.k_lo}, {fit.k_hi}]")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "gen": _cmd_gen, "solve": _cmd_solve, "bench": _cmd_bench,
        "simulate": _cmd_simulate, "rates": _cmd_rates,
    }[args.command]
    try:
        return handler(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
