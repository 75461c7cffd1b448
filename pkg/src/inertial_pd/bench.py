"""Experiment orchestration: seeded instances, solver sweeps, certificates.

An experiment spec is a JSON-serializable dict (see SPEC_FIELDS in the
README); ``run_experiment`` generates the instance, runs every listed solver
on it, writes one trace CSV per solver plus a summary CSV, optionally emits
SVG log-log plots, and evaluates the enabled certificates.  The returned
bundle carries ``ok`` = True iff every certificate passed and no solver
aborted.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import generators, solver
from .generators import (L1L2_DEFAULTS, gen_l1l2, gen_nnls, l1l2_saddle,
                         scalar_instance)
from .problems import CompositeProblem, LinearMap, SaddlePointCertificate
from .prox import l1_plus_sql2
from .rates import RateFit, fit_rate_slope
from .schedules import (ScalingPolicy, attouch_cabot_rule,
                        chambolle_dossal_rule, constant_beta, nesterov_rule,
                        power_beta)
from .subsolvers import InnerSolverConfig, afbm_baseline, estimate_opnorm, \
    fista_baseline
from .trace import MetricsTrace

# hand-verified metrics of the scalar regression instance (rows k = 1, 2):
# feasibility |x_k|, gap L_rho(x_k,0), objective residual x_k^2/2, energy E(k)
SCALAR_REFERENCE_ROWS = (
    {"k": 1, "feas_violation": 1.0, "pd_gap": 1.0, "obj_residual": 0.5,
     "energy_total": 1.25},
    {"k": 2, "feas_violation": 3.0 / 17.0, "pd_gap": (3.0 / 17.0) ** 2,
     "obj_residual": 0.5 * (3.0 / 17.0) ** 2, "energy_total": 44.0 / 289.0},
)


def rule_from_name(name: str, alpha: float | None):
    name = name.lower()
    if name in ("nesterov", "n"):
        return nesterov_rule()
    if name in ("cd", "chambolle-dossal"):
        return chambolle_dossal_rule(alpha if alpha is not None else 3.0)
    if name in ("ac", "attouch-cabot"):
        return attouch_cabot_rule(alpha if alpha is not None else 3.0)
    raise ValueError(f"unknown extrapolation rule {name!r}")


def scaling_from(beta0: float, beta_power: float) -> ScalingPolicy:
    if beta_power > 0:
        return power_beta(beta0, beta_power)
    return constant_beta(beta0)


def solver_params_from(spec: dict, budget: int,
                       record_walltime: bool) -> solver.SolverParams:
    inner = InnerSolverConfig(subtol=spec.get("inner_tol", 1e-8),
                              max_inner=int(spec.get("inner_max", 150)))
    return solver.SolverParams(
        rho=spec.get("rho", 1.0), sigma=spec.get("sigma", 1.0),
        rule=rule_from_name(spec.get("rule", "nesterov"), spec.get("alpha")),
        scaling=scaling_from(spec.get("beta0", 1.0), spec.get("beta_power", 0.0)),
        inner=inner, max_iter=budget, stop_tol=spec.get("stop_tol", 0.0),
        record_walltime=record_walltime)


def surrogate_unconstrained(problem: CompositeProblem) -> tuple[CompositeProblem, float]:
    """Unconstrained stand-in for a constrained composite problem, used by
    the FISTA/AFBM baselines: the equality constraint becomes a
    least-squares data-fit term, f~(x) = ||Ax-b||^2/2 + f(x), g unchanged.
    Returns the surrogate and its default step 1/(||A||^2 + lipschitz_f)."""
    A, b = problem.op_A, problem.rhs_b
    opnorm = estimate_opnorm(A)
    lip = opnorm ** 2 + problem.lipschitz_f

    surrogate = CompositeProblem(
        dim_primal=problem.dim_primal, dim_dual=0,
        f_value=lambda x: 0.5 * float(np.sum((A.matvec(x) - b) ** 2))
        + float(problem.f_value(x)),
        f_grad=lambda x: A.rmatvec(A.matvec(x) - b) + problem.f_grad(x),
        lipschitz_f=lip, g=problem.g,
        op_A=LinearMap(np.zeros((0, problem.dim_primal))), rhs_b=np.zeros(0))
    return surrogate, 1.0 / lip


@dataclass
class SolverRun:
    label: str
    trace: MetricsTrace | None
    error: str | None = None
    slopes: dict[str, RateFit] = field(default_factory=dict)


@dataclass
class ExperimentBundle:
    spec: dict
    runs: list[SolverRun]
    certificates: list[tuple[str, bool, str]]   # (name, passed, detail)
    out_dir: Path | None

    @property
    def ok(self) -> bool:
        return (all(passed for _, passed, _ in self.certificates)
                and all(r.error is None for r in self.runs))


def _build_instance(spec: dict):
    kind = spec.get("kind", "l1l2")
    dims = spec.get("dims", {})
    params = spec.get("params", {})
    seed = int(spec.get("seed", 0))
    if kind == "scalar":
        problem, saddle = scalar_instance()
        return problem, saddle, None
    if kind == "l1l2":
        m = int(dims.get("m", generators.L1L2_DESK_DIMS[0]))
        n = int(dims.get("n", generators.L1L2_DESK_DIMS[1]))
        problem, x_true = gen_l1l2(
            m, n, mu=params.get("mu", 1.5),
            sparsity=params.get("sparsity", 0.05),
            noise_norm=params.get("noise_norm", 1e-6), seed=seed,
            f_split=params.get("f_split", "quadratic"))
        saddle = None
        if spec.get("saddle") == "auto":
            saddle = l1l2_saddle(problem)
        return problem, saddle, x_true
    if kind == "nnls":
        m = int(dims.get("m", generators.NNLS_DESK_DIMS[0]))
        n = int(dims.get("n", generators.NNLS_DESK_DIMS[1]))
        problem = gen_nnls(m, n, density=params.get("density", 0.5),
                           seed=seed, g_kind=params.get("g", "nonneg"))
        return problem, None, None
    raise ValueError(f"unknown experiment kind {kind!r}")


def _run_one(label: str, sspec: dict, problem: CompositeProblem,
             saddle: SaddlePointCertificate | None, budget: int,
             record_walltime: bool, x0=None, lam0=None) -> SolverRun:
    name = sspec.get("name", "ipd")
    try:
        if name == "ipd":
            params = solver_params_from(sspec, budget, record_walltime)
            trace = solver.run(problem, params, x0=x0, lam0=lam0, saddle=saddle)
        elif name in ("fista", "afbm"):
            ref_value = saddle.opt_value if saddle is not None else None
            if problem.dim_dual:
                target, default_step = surrogate_unconstrained(problem)
                eq_op, eq_rhs = problem.op_A, problem.rhs_b
            else:
                target, eq_op, eq_rhs = problem, None, None
                default_step = 1.0 / max(problem.lipschitz_f, 1e-300)
            step = sspec.get("step") or default_step
            if name == "fista":
                trace = fista_baseline(target, step, budget, x0=x0,
                                       eq_op=eq_op, eq_rhs=eq_rhs,
                                       ref_value=ref_value,
                                       record_walltime=record_walltime)
            else:
                trace = afbm_baseline(target, step, sspec.get("alpha", 5.0),
                                      budget, x0=x0, eq_op=eq_op,
                                      eq_rhs=eq_rhs, ref_value=ref_value,
                                      record_walltime=record_walltime)
        else:
            raise ValueError(f"unknown solver {name!r}")
        return SolverRun(label=label, trace=trace)
    except ValueError as exc:
        return SolverRun(label=label, trace=None, error=str(exc))


def _check_certificates(spec: dict, runs: list[SolverRun],
                        problem: CompositeProblem,
                        saddle: SaddlePointCertificate | None,
                        budget: int) -> list[tuple[str, bool, str]]:
    cert_spec = spec.get("certificates", {})
    by_label = {r.label: r for r in runs}
    results: list[tuple[str, bool, str]] = []

    if cert_spec.get("v_identity", True):
        for r in runs:
            if r.trace is None or "v_identity_max_rel" not in r.trace.cert_data:
                continue
            worst = r.trace.cert_data["v_identity_max_rel"]
            results.append((f"v-identity[{r.label}]", worst <= 1e-10,
                            f"max rel dev {worst:.3e}"))

    if cert_spec.get("bounds") and saddle is not None:
        for r in runs:
            if r.trace is None or r.trace.solver != "inertial_pd":
                continue
            params = solver_params_from(
                next(s for s in spec["solvers"]
                     if s.get("label", s.get("name")) == r.label),
                budget, False)
            report = solver.bound_certificates(r.trace, saddle, params, problem)
            results.append((f"decrease-bounds[{r.label}]", report.ok,
                            f"C={report.constant_C:.4g} "
                            f"a in [{report.a_min:.3g}, {report.a_max:.3g}]"))

    for sl in cert_spec.get("slopes", ()):
        r = by_label.get(sl["solver"])
        if r is None or r.trace is None:
            results.append((f"slope[{sl['solver']}]", False, "missing run"))
            continue
        col = sl.get("column", "feas_violation")
        fit = fit_rate_slope(r.trace.column(col), tuple(sl["window"]),
                             k=r.trace.column("k"))
        r.slopes[col] = fit
        passed = fit.slope <= sl["max_slope"]
        results.append((f"slope[{sl['solver']}:{col}]", passed,
                        f"slope {fit.slope:.3f} (need <= {sl['max_slope']}, "
                        f"r2 {fit.r_squared:.3f})"))

    for od in cert_spec.get("ordering", ()):
        ra, rb = by_label.get(od["better"]), by_label.get(od["than"])
        if ra is None or rb is None or ra.trace is None or rb.trace is None:
            results.append(("ordering", False, "missing run"))
            continue
        col = od.get("metric", "feas_violation")
        va, vb = ra.trace.last(col), rb.trace.last(col)
        results.append((f"ordering[{od['better']}<{od['than']}:{col}]",
                        va < vb, f"{va:.3e} vs {vb:.3e}"))

    if cert_spec.get("scalar_reference"):
        ok, detail = True, []
        for r in runs:
            if r.trace is None or r.trace.solver != "inertial_pd":
                continue
            for ref in SCALAR_REFERENCE_ROWS:
                row = r.trace.rows[ref["k"] - 1]
                for key, want in ref.items():
                    if key == "k":
                        continue
                    err = abs(row[key] - want)
                    if err > 1e-12:
                        ok = False
                        detail.append(f"k={ref['k']} {key} off by {err:.2e}")
        results.append(("scalar-reference", ok,
                        "; ".join(detail) if detail else "rows match to 1e-12"))
    return results


def run_experiment(spec: dict, out_dir=None) -> ExperimentBundle:
    """Run every solver in the spec on the generated instance.

    Writes trace_<label>.csv per solver and summary.csv under ``out_dir``
    (or spec["output_dir"]); set spec["svg"] for log-log plots.  Solver
    aborts are recorded per solver and the bundle is still emitted.
    """
    problem, saddle, _ = _build_instance(spec)
    budget = int(spec.get("budget", 100))
    record_walltime = bool(spec.get("record_walltime", False))
    x0 = np.asarray(spec["x0"], dtype=float) if "x0" in spec else None
    lam0 = np.asarray(spec["lam0"], dtype=float) if "lam0" in spec else None
    runs = []
    for sspec in spec.get("solvers", ({"name": "ipd"},)):
        label = sspec.get("label", sspec.get("name", "ipd"))
        runs.append(_run_one(label, sspec, problem, saddle, budget,
                             record_walltime, x0=x0, lam0=lam0))

    certificates = _check_certificates(spec, runs, problem, saddle, budget)

    out = Path(out_dir if out_dir is not None else spec.get("output_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    for r in runs:
        if r.trace is not None:
            r.trace.to_csv(out / f"trace_{r.label}.csv")
    _write_summary(out / "summary.csv", runs, certificates)
    if spec.get("svg"):
        _write_svg(out, runs)
    return ExperimentBundle(spec=spec, runs=runs, certificates=certificates,
                            out_dir=out)


def _write_summary(path: Path, runs: list[SolverRun],
                   certificates: list[tuple[str, bool, str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["solver", "iterations", "final_feas",
                         "final_obj_residual", "final_pd_gap",
                         "fitted_slopes", "error"])
        for r in runs:
            if r.trace is None:
                writer.writerow([r.label, 0, "", "", "", "", r.error])
                continue
            slopes = ";".join(f"{c}:{f.slope:.4f}" for c, f in r.slopes.items())
            writer.writerow([
                r.label, len(r.trace) - 1,
                f"{r.trace.last('feas_violation'):.17g}",
                f"{r.trace.last('obj_residual'):.17g}",
                f"{r.trace.last('pd_gap'):.17g}", slopes, ""])
        writer.writerow([])
        writer.writerow(["certificate", "passed", "detail"])
        for name, passed, detail in certificates:
            writer.writerow([name, "pass" if passed else "FAIL", detail])


def _write_svg(out: Path, runs: list[SolverRun]) -> None:
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    for metric in ("feas_violation", "pd_gap", "obj_residual"):
        fig, ax = plt.subplots(figsize=(5, 4))
        drew = False
        for r in runs:
            if r.trace is None:
                continue
            vals = r.trace.column(metric)
            ks = r.trace.column("k")
            good = np.isfinite(vals) & (vals > 0)
            if good.any():
                ax.loglog(ks[good], vals[good], label=r.label)
                drew = True
        if drew:
            ax.set_xlabel("iteration k")
            ax.set_ylabel(metric)
            ax.legend()
            fig.tight_layout()
            fig.savefig(out / f"{metric}.svg")
        plt.close(fig)


# named presets; desk scale keeps the reference experiments' parameter sets
# on proportionally smaller instances
PRESETS: dict[str, dict] = {
    "scalar-regression": {
        "kind": "scalar", "budget": 5, "x0": [1.0], "lam0": [0.0],
        "solvers": [{"name": "ipd", "label": "ipd", "rule": "cd", "alpha": 3.0,
                     "beta0": 1.0, "rho": 1.0, "sigma": 1.0}],
        "certificates": {"v_identity": True, "scalar_reference": True,
                         "bounds": True},
    },
    "example5.2-desk": {
        "kind": "l1l2", "dims": {"m": 150, "n": 200},
        "params": dict(L1L2_DEFAULTS), "budget": 100,
        "solvers": [
            {"name": "ipd", "label": "ipd", "rule": "cd", "alpha": 15.0,
             "beta0": 2.0, "rho": 1e-4, "sigma": 10.0, "inner_tol": 1e-6,
             "inner_max": 150},
            {"name": "fista", "label": "fista"},
        ],
        "certificates": {
            "v_identity": True,
            "ordering": [{"better": "ipd", "than": "fista",
                          "metric": "feas_violation"}],
        },
    },
    "example5.2-full": {
        "kind": "l1l2", "dims": {"m": 1500, "n": 2000},
        "params": dict(L1L2_DEFAULTS), "budget": 100,
        "solvers": [
            {"name": "ipd", "label": "ipd", "rule": "cd", "alpha": 15.0,
             "beta0": 2.0, "rho": 1e-4, "sigma": 10.0, "inner_tol": 1e-6,
             "inner_max": 150},
            {"name": "fista", "label": "fista"},
        ],
        "certificates": {"v_identity": True},
    },
    "example5.3-desk": {
        "kind": "nnls", "dims": {"m": 150, "n": 200},
        "params": {"density": 0.5, "g": "nonneg"}, "budget": 200,
        "solvers": [
            {"name": "ipd", "label": "ipd", "rule": "cd", "alpha": 5.0,
             "beta0": 1.0, "rho": 0.1, "sigma": 1.0},
            {"name": "fista", "label": "fista"},
            {"name": "afbm", "label": "afbm", "alpha": 5.0},
        ],
        "certificates": {"v_identity": True},
    },
    "example5.3-full": {
        "kind": "nnls", "dims": {"m": 500, "n": 1000},
        "params": {"density": 0.5, "g": "nonneg"}, "budget": 2000,
        "solvers": [
            {"name": "ipd", "label": "ipd", "rule": "cd", "alpha": 5.0,
             "beta0": 1.0, "rho": 0.1, "sigma": 1.0},
            {"name": "fista", "label": "fista"},
            {"name": "afbm", "label": "afbm", "alpha": 5.0},
        ],
        "certificates": {"v_identity": True},
    },
}


def load_spec(path_or_preset: str) -> dict:
    """A preset name, or a path to a JSON spec file."""
    if path_or_preset in PRESETS:
        return json.loads(json.dumps(PRESETS[path_or_preset]))
    path = Path(path_or_preset)
    if not path.exists():
        raise ValueError(
            f"{path_or_preset!r} is neither a preset "
            f"({', '.join(sorted(PRESETS))}) nor a spec file")
    return json.loads(path.read_text())
