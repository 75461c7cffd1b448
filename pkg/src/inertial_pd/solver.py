"""Inertial accelerated primal-dual method with Lyapunov-energy certificates.

One iteration, from (x_{k-1}, x_k, lam_{k-1}, lam_k) with schedule values
(t_k, t_{k+1}, beta_k) and parameters rho, sigma > 0:

    x_bar  = x_k + ((t_k-1)/t_{k+1}) (x_k - x_{k-1})
    s      = sigma beta_k t_{k+1}^2,   zeta = s + rho
    phi    = ((t_{k+1}-1) A x_k + b) / t_{k+1}
    mu     = lam_k + ((t_k-1)/t_{k+1}) (lam_k - lam_{k-1})
    xi     = t_{k+1} mu - (t_{k+1}-1) lam_k
    x_{k+1} = argmin_x <grad f(x_bar), x> + g(x) + ||x-x_bar||^2/(2 beta_k)
                       + (zeta/2) ||A x - (s phi + rho b - xi)/zeta||^2
    u_{k+1} = x_{k+1} + (t_{k+1}-1)(x_{k+1} - x_k)
    lam_{k+1} = mu + sigma beta_k (A u_{k+1} - b)
    v_{k+1} = xi + s (A x_{k+1} - phi)     [= t_{k+1} lam_{k+1} - (t_{k+1}-1) lam_k]

The subproblem is solved exactly (shifted linear system via the cached
eigendecomposition of A^T A) when g = 0, otherwise by warm-started inner
FISTA.  With a saddle certificate the run records the energy

    E(k) = t_{k+1}(t_{k+1}-1) beta_k (L_rho(x_k, lam*) - L_rho(x*, lam*))
           + ||u_k - x*||^2 / 2 + ||v_k - lam*||^2 / (2 sigma),

whose decrease (under lipschitz_f * beta_k <= 1 and exact subproblem solves)
yields every convergence bound checked by bound_certificates.

A solver run owns its state and is single-threaded; concurrent runs over a
shared immutable CompositeProblem are fine.  Callbacks must not mutate
solver state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .problems import CompositeProblem, SaddlePointCertificate, \
    eval_aug_lagrangian, kkt_residual
from .schedules import ExtrapolationRule, ScalingPolicy, ScheduleState
from .subsolvers import InnerSolverConfig, QuadraticCompositeSubproblem, \
    estimate_opnorm, fista_solve
from .trace import MetricsTrace

ENERGY_DRIFT_TOL = 1e-9  # relative to max(1, E(1)), exact-solve regime
A_LOWER_TOL = 1e-12      # float-equality allowance on 0 <= a_k


@dataclass(frozen=True)
class SolverParams:
    rho: float
    sigma: float
    rule: ExtrapolationRule
    scaling: ScalingPolicy
    inner: InnerSolverConfig = field(default_factory=InnerSolverConfig)
    max_iter: int = 100
    stop_tol: float = 0.0
    probe_step: float | None = None
    check_energy: bool = False   # enforce lipschitz_f * beta_k <= 1 and log drift
    record_walltime: bool = False

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.stop_tol < 0:
            raise ValueError(f"stop_tol must be >= 0, got {self.stop_tol}")


@dataclass
class SolverState:
    k: int
    x_prev: np.ndarray
    x_cur: np.ndarray
    lam_prev: np.ndarray
    lam_cur: np.ndarray
    t_cur: float
    t_next: float
    beta_cur: float
    Ax_cur: np.ndarray


@dataclass
class IterationScratch:
    """Step-1 auxiliaries; dual_update fills the step-3 outputs."""

    x_bar: np.ndarray
    grad_at_anchor: np.ndarray
    s_next: float
    zeta_next: float
    phi_next: np.ndarray
    mu: np.ndarray
    xi_next: np.ndarray
    target_c: np.ndarray
    u_next: np.ndarray | None = None
    v_next: np.ndarray | None = None
    Ax_next: np.ndarray | None = None


@dataclass(frozen=True)
class EnergyBreakdown:
    e0: float
    e1: float
    e2: float

    @property
    def total(self) -> float:
        return self.e0 + self.e1 + self.e2


def assemble_iteration(state: SolverState, params: SolverParams,
                       problem: CompositeProblem) -> IterationScratch:
    """Step 1: extrapolations and the subproblem's constant terms."""
    w = (state.t_cur - 1.0) / state.t_next
    x_bar = state.x_cur + w * (state.x_cur - state.x_prev)
    s = params.sigma * state.beta_cur * state.t_next ** 2
    zeta = s + params.rho
    phi = ((state.t_next - 1.0) * state.Ax_cur + problem.rhs_b) / state.t_next
    mu = state.lam_cur + w * (state.lam_cur - state.lam_prev)
    xi = state.t_next * mu - (state.t_next - 1.0) * state.lam_cur
    target_c = (s * phi + params.rho * problem.rhs_b - xi) / zeta
    return IterationScratch(
        x_bar=x_bar, grad_at_anchor=np.asarray(problem.f_grad(x_bar), dtype=float),
        s_next=s, zeta_next=zeta, phi_next=phi, mu=mu, xi_next=xi,
        target_c=target_c)


def _solve_shifted_quadratic(problem: CompositeProblem, scratch: IterationScratch,
                             beta: float) -> np.ndarray:
    """Exact minimizer for g = 0:
    (I/beta + zeta A^T A) x = x_bar/beta - grad + zeta A^T c,
    refined to 1e-12 relative residual."""
    rhs = scratch.x_bar / beta - scratch.grad_at_anchor
    zeta = scratch.zeta_next
    if problem.dim_dual == 0:
        return beta * rhs
    rhs = rhs + zeta * problem.op_A.rmatvec(scratch.target_c)
    w, v = problem.op_A.gram_eigh()
    denom = 1.0 / beta + zeta * w
    x = v @ ((v.T @ rhs) / denom)
    rhs_norm = max(float(np.linalg.norm(rhs)), 1e-300)
    for _ in range(3):
        residual = rhs - (x / beta + zeta * problem.op_A.rmatvec(problem.op_A.matvec(x)))
        if np.linalg.norm(residual) <= 1e-12 * rhs_norm:
            break
        x = x + v @ ((v.T @ residual) / denom)
    return x


def solve_primal_subproblem(scratch: IterationScratch, state: SolverState,
                            params: SolverParams, problem: CompositeProblem,
                            opnorm: float) -> tuple[np.ndarray, int, bool]:
    """Step 2.  Returns (x_{k+1}, inner iterations, converged)."""
    if problem.g.kind == "zero":
        return _solve_shifted_quadratic(problem, scratch, state.beta_cur), 0, True
    sub = QuadraticCompositeSubproblem(
        anchor=scratch.x_bar, grad_at_anchor=scratch.grad_at_anchor,
        beta=state.beta_cur, zeta=scratch.zeta_next,
        target_c=scratch.target_c, op_A=problem.op_A, g=problem.g,
        opnorm=opnorm)
    return fista_solve(sub, state.x_cur, params.inner)


def dual_update(scratch: IterationScratch, x_next: np.ndarray,
                state: SolverState, params: SolverParams,
                problem: CompositeProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Step 3.  Returns (u_{k+1}, lam_{k+1}, v_{k+1}) and caches A x_{k+1}."""
    u_next = x_next + (state.t_next - 1.0) * (x_next - state.x_cur)
    Ax_next = problem.op_A.matvec(x_next)
    Au_next = Ax_next + (state.t_next - 1.0) * (Ax_next - state.Ax_cur)
    lam_next = scratch.mu + params.sigma * state.beta_cur * (Au_next - problem.rhs_b)
    v_next = scratch.xi_next + scratch.s_next * (Ax_next - scratch.phi_next)
    scratch.u_next = u_next
    scratch.v_next = v_next
    scratch.Ax_next = Ax_next
    return u_next, lam_next, v_next


def initial_uv(x0: np.ndarray, x1: np.ndarray, lam0: np.ndarray,
               lam1: np.ndarray, t1: float) -> tuple[np.ndarray, np.ndarray]:
    """k = 1 boundary conventions: u_1 = x_1 + (t_1-1)(x_1-x_0),
    v_1 = t_1 lam_1 - (t_1-1) lam_0."""
    return (x1 + (t1 - 1.0) * (x1 - x0),
            t1 * lam1 - (t1 - 1.0) * lam0)


def energy(problem: CompositeProblem, params: SolverParams,
           saddle: SaddlePointCertificate, x: np.ndarray, u: np.ndarray,
           v: np.ndarray, t_next: float, beta: float) -> EnergyBreakdown:
    """E(k) evaluated at iterate k with its schedule pair (t_{k+1}, beta_k)."""
    gap = (eval_aug_lagrangian(problem, params.rho, x, saddle.lambda_star)
           - saddle.opt_value)
    e0 = t_next * (t_next - 1.0) * beta * gap
    du = u - saddle.x_star
    dv = v - saddle.lambda_star
    return EnergyBreakdown(e0=e0, e1=0.5 * float(du @ du),
                           e2=float(dv @ dv) / (2.0 * params.sigma))


def run(problem: CompositeProblem, params: SolverParams,
        x0: np.ndarray | None = None, lam0: np.ndarray | None = None,
        saddle: SaddlePointCertificate | None = None,
        callback=None) -> MetricsTrace:
    """Drive the iteration for params.max_iter steps (or until the KKT
    residual drops below params.stop_tol, when positive).

    The trace holds one row per iterate starting with the initial point, so
    max_iter = 0 yields exactly the initial metrics.  Inner-solver
    non-convergence is recorded as a warning, not an error; an inadmissible
    schedule aborts with a diagnostic ValueError.
    """
    x1 = np.zeros(problem.dim_primal) if x0 is None else np.asarray(x0, dtype=float).copy()
    lam1 = np.zeros(problem.dim_dual) if lam0 is None else np.asarray(lam0, dtype=float).copy()
    if x1.shape != (problem.dim_primal,) or lam1.shape != (problem.dim_dual,):
        raise ValueError("initial point dimensions do not match the problem")

    sched = ScheduleState(params.rule, params.scaling)
    state = SolverState(k=1, x_prev=x1.copy(), x_cur=x1,
                        lam_prev=lam1.copy(), lam_cur=lam1,
                        t_cur=sched.t_cur, t_next=sched.t_next,
                        beta_cur=sched.beta_cur,
                        Ax_cur=problem.op_A.matvec(x1))
    u_cur, v_cur = initial_uv(state.x_prev, x1, state.lam_prev, lam1, sched.t_cur)
    opnorm = estimate_opnorm(problem.op_A, params.inner)

    trace = MetricsTrace(solver="inertial_pd")
    trace.cert_data.update(
        beta0=params.scaling.beta0, t1=sched.t_cur,
        lam0_norm=float(np.linalg.norm(state.lam_prev)),
        t1_lam_diff=sched.t_cur * float(np.linalg.norm(lam1 - state.lam_prev)),
        max_t_lam_diff=0.0,
        max_lam_norm=float(np.linalg.norm(lam1)),
        feas1=float(np.linalg.norm(state.Ax_cur - problem.rhs_b)),
        v_identity_max_rel=0.0,
    )
    started = time.perf_counter()

    def record(k: int) -> None:
        feas = float(np.linalg.norm(state.Ax_cur - problem.rhs_b))
        obj = problem.objective(state.x_cur)
        trace.objective.append(obj)
        trace.t_next.append(state.t_next)
        row = dict(k=k, t_k=state.t_cur, beta_k=state.beta_cur,
                   feas_violation=feas,
                   inner_iters=trace.cert_data.pop("_inner", 0),
                   wall_ms=(time.perf_counter() - started) * 1e3
                   if params.record_walltime else 0.0)
        if saddle is not None:
            e = energy(problem, params, saddle, state.x_cur, u_cur, v_cur,
                       state.t_next, state.beta_cur)
            row.update(obj_residual=abs(obj - saddle.opt_value),
                       pd_gap=(eval_aug_lagrangian(problem, params.rho,
                                                   state.x_cur, saddle.lambda_star)
                               - saddle.opt_value),
                       energy_total=e.total, energy_e0=e.e0,
                       energy_e1=e.e1, energy_e2=e.e2)
        trace.append(**row)

    record(1)
    energy_prev = trace.rows[0].get("energy_total", np.nan)
    energy_ref = max(1.0, energy_prev) if saddle is not None else 1.0

    for k in range(1, params.max_iter + 1):
        if params.check_energy and problem.lipschitz_f * state.beta_cur > 1.0:
            raise ValueError(
                f"energy checking requires lipschitz_f * beta_k <= 1; "
                f"violated at k={k} ({problem.lipschitz_f * state.beta_cur:.3e})")

        scratch = assemble_iteration(state, params, problem)
        x_next, inner_iters, converged = solve_primal_subproblem(
            scratch, state, params, problem, opnorm)
        if not converged:
            trace.warnings.append((k, "inner solver hit its iteration budget"))
        u_next, lam_next, v_next = dual_update(scratch, x_next, state, params, problem)

        # algebraic identity v_{k+1} = t_{k+1} lam_{k+1} - (t_{k+1}-1) lam_k
        v_alt = state.t_next * lam_next - (state.t_next - 1.0) * state.lam_cur
        rel = (float(np.linalg.norm(v_next - v_alt))
               / max(1.0, float(np.linalg.norm(v_next))))
        trace.cert_data["v_identity_max_rel"] = max(
            trace.cert_data["v_identity_max_rel"], rel)

        trace.du_sq.append(float(np.sum((u_next - u_cur) ** 2)))
        trace.dv_sq.append(float(np.sum((v_next - v_cur) ** 2)))
        trace.dx_norm.append(float(np.linalg.norm(x_next - state.x_cur)))
        trace.cert_data["max_t_lam_diff"] = max(
            trace.cert_data["max_t_lam_diff"],
            state.t_next * float(np.linalg.norm(lam_next - state.lam_cur)))
        trace.cert_data["max_lam_norm"] = max(
            trace.cert_data["max_lam_norm"], float(np.linalg.norm(lam_next)))
        trace.cert_data["_inner"] = inner_iters

        state.x_prev, state.x_cur = state.x_cur, x_next
        state.lam_prev, state.lam_cur = state.lam_cur, lam_next
        state.Ax_cur = scratch.Ax_next
        u_cur, v_cur = u_next, v_next
        sched.advance()  # raises with diagnostic if (q0)/(q1) fail at k+1
        state.k = k + 1
        state.t_cur, state.t_next = sched.t_cur, sched.t_next
        state.beta_cur = sched.beta_cur

        record(k + 1)
        if params.check_energy and saddle is not None:
            energy_now = trace.rows[-1]["energy_total"]
            if energy_now > energy_prev + ENERGY_DRIFT_TOL * energy_ref:
                trace.warnings.append(
                    (k, f"energy increased by {energy_now - energy_prev:.3e}"))
            energy_prev = energy_now
        if callback is not None:
            callback(k, state)
        if params.stop_tol > 0.0:
            stat, feas = kkt_residual(problem, state.x_cur, state.lam_cur,
                                      params.probe_step)
            if max(stat, feas) <= params.stop_tol:
                break

    trace.cert_data.pop("_inner", None)
    return trace


@dataclass(frozen=True)
class BoundCheck:
    name: str
    ok: bool
    worst_slack: float           # min over k of (bound - value); >= -tol to pass
    first_violation: int | None  # row k of first failure


@dataclass(frozen=True)
class CertificateReport:
    gap: BoundCheck
    feasibility: BoundCheck
    objective: BoundCheck
    a_range: BoundCheck          # -A_LOWER_TOL <= a_k < 1
    constant_C: float
    energy_initial: float
    a_min: float
    a_max: float

    @property
    def ok(self) -> bool:
        return self.gap.ok and self.feasibility.ok and self.objective.ok \
            and self.a_range.ok


def bound_certificates(trace: MetricsTrace, saddle: SaddlePointCertificate,
                       params: SolverParams,
                       problem: CompositeProblem) -> CertificateReport:
    """Check every recorded iterate against the closed-form decrease bounds.

    With E(1) the initial energy and
    C = ||m_1|| + (max_k ||t_{k+1}(lam_{k+1}-lam_k)|| + t_1 ||lam_1-lam_0||
        + max_k ||lam_k|| + ||lam_0||) / sigma,  m_1 = t_1^2 beta_0 (A x_1 - b),
    the per-iterate assertions are

        gap_k  <= E(1) / (t_{k+1}(t_{k+1}-1) beta_k)
        feas_k <= (beta_0 t_1^2 feas_1 + 2C) / (beta_k t_{k+1}(t_{k+1}-1))
        obj_k  <= gap bound + ||lam*|| feas bound + (rho/2) feas bound^2
        a_k in [0, 1),  a_k = 1 - t_{k+1}(t_{k+1}-1) beta_k / (t_k^2 beta_{k-1})

    each with tolerance 1e-8 * max(1, bound); the lower a_k check allows
    A_LOWER_TOL of rounding (the Nesterov rule makes a_k exactly zero in
    exact arithmetic).
    """
    if not trace.rows:
        raise ValueError("empty trace")
    E1 = trace.rows[0].get("energy_total", np.nan)
    if not np.isfinite(E1):
        raise ValueError("trace lacks energy data; run with a saddle certificate")
    cd = trace.cert_data
    sigma = params.sigma
    m1_norm = cd["t1"] ** 2 * cd["beta0"] * cd["feas1"]
    C = (m1_norm + (cd["max_t_lam_diff"] + cd["t1_lam_diff"]
                    + cd["max_lam_norm"] + cd["lam0_norm"]) / sigma)
    feas_numer = cd["beta0"] * cd["t1"] ** 2 * cd["feas1"] + 2.0 * C
    lam_star_norm = float(np.linalg.norm(saddle.lambda_star))

    worst = {"gap": np.inf, "feas": np.inf, "obj": np.inf}
    first = {"gap": None, "feas": None, "obj": None, "a": None}
    a_min, a_max = np.inf, -np.inf
    a_ok = True
    beta_prev = cd["beta0"]
    for i, row in enumerate(trace.rows):
        t_k, beta_k = row["t_k"], row["beta_k"]
        t_k1 = trace.t_next[i]
        denom = t_k1 * (t_k1 - 1.0) * beta_k
        checks = []
        if denom > 0.0:
            gap_bound = E1 / denom
            feas_bound = feas_numer / denom
            obj_bound = (gap_bound + lam_star_norm * feas_bound
                         + 0.5 * params.rho * feas_bound ** 2)
            checks = [("gap", row["pd_gap"], gap_bound),
                      ("feas", row["feas_violation"], feas_bound),
                      ("obj", row["obj_residual"], obj_bound)]
        for name, value, bound in checks:
            slack = bound - value
            worst[name] = min(worst[name], slack)
            if slack < -1e-8 * max(1.0, bound) and first[name] is None:
                first[name] = row["k"]
        a_k = 1.0 - denom / (t_k * t_k * beta_prev)
        a_min, a_max = min(a_min, a_k), max(a_max, a_k)
        if not (-A_LOWER_TOL <= a_k < 1.0):
            a_ok = False
            if first["a"] is None:
                first["a"] = row["k"]
        beta_prev = beta_k

    def check(name: str, label: str) -> BoundCheck:
        return BoundCheck(name=label, ok=first[name] is None,
                          worst_slack=worst.get(name, np.nan),
                          first_violation=first[name])

    return CertificateReport(
        gap=check("gap", "primal-dual gap bound"),
        feasibility=check("feas", "feasibility bound"),
        objective=check("obj", "objective residual bound"),
        a_range=BoundCheck("a_k in [0,1)", a_ok, a_min, first["a"]),
        constant_C=C, energy_initial=E1, a_min=a_min, a_max=a_max)
