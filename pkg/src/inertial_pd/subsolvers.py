"""Accelerated proximal-gradient machinery.

Holds the inner solver for the primal subproblem of the main method, the
FISTA / inertial forward-backward baselines used in benchmarks, and power
iteration for operator norms.  Everything here is stateless over immutable
inputs, so concurrent invocations are safe.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .problems import CompositeProblem, LinearMap
from .prox import ProxFunction
from .rng import Stream
from .trace import MetricsTrace


@dataclass(frozen=True)
class InnerSolverConfig:
    """Inner-loop accuracy knobs.

    ``subtol`` drives the relative-change stopping rule
    ||z_j - z_{j-1}|| / max(||z_{j-1}||, 1) <= subtol; ``max_inner`` caps the
    iteration count.  ``opnorm_iters``/``opnorm_tol`` control the power
    iteration used for Lipschitz constants.
    """

    subtol: float = 1e-8
    max_inner: int = 150
    opnorm_iters: int = 200
    opnorm_tol: float = 1e-10

    def __post_init__(self):
        if self.subtol <= 0:
            raise ValueError(f"subtol must be > 0, got {self.subtol}")
        if self.max_inner < 1:
            raise ValueError(f"max_inner must be >= 1, got {self.max_inner}")


def estimate_opnorm(op_A: LinearMap, config: InnerSolverConfig | None = None,
                    seed: int = 0) -> float:
    """Largest singular value of A by power iteration on A*A.

    Starts from a seeded random vector and stops when the eigenvalue estimate
    changes by less than ``opnorm_tol`` relative, or after ``opnorm_iters``
    rounds.  Returns 0 for an empty or zero operator.
    """
    config = config or InnerSolverConfig()
    m, n = op_A.shape
    if m * n == 0:
        return 0.0
    v = Stream(seed, "opnorm").normal(n)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        v = np.ones(n)
        nv = math.sqrt(n)
    v /= nv
    eig = 0.0
    for _ in range(config.opnorm_iters):
        w = op_A.rmatvec(op_A.matvec(v))
        eig_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(eig_new - eig) <= config.opnorm_tol * max(abs(eig_new), 1e-300):
            eig = eig_new
            break
        eig = eig_new
    return math.sqrt(max(eig, 0.0))


@dataclass(frozen=True)
class QuadraticCompositeSubproblem:
    """min_x  <grad_at_anchor, x> + g(x) + ||x-anchor||^2/(2 beta)
             + (zeta/2) ||A x - target_c||^2.

    The smooth part has Lipschitz constant 1/beta + zeta ||A||^2.
    """

    anchor: np.ndarray
    grad_at_anchor: np.ndarray
    beta: float
    zeta: float
    target_c: np.ndarray
    op_A: LinearMap
    g: ProxFunction
    opnorm: float    # cached ||A||; A never changes within a run

    def smooth_lipschitz(self) -> float:
        return 1.0 / self.beta + self.zeta * self.opnorm ** 2

    def smooth_grad(self, x: np.ndarray) -> np.ndarray:
        grad = self.grad_at_anchor + (x - self.anchor) / self.beta
        if self.op_A.shape[0] and self.zeta != 0.0:
            grad = grad + self.zeta * self.op_A.rmatvec(
                self.op_A.matvec(x) - self.target_c)
        return grad

    def smooth_value(self, x: np.ndarray) -> float:
        d = x - self.anchor
        val = float(self.grad_at_anchor @ x) + float(d @ d) / (2.0 * self.beta)
        if self.op_A.shape[0] and self.zeta != 0.0:
            r = self.op_A.matvec(x) - self.target_c
            val += 0.5 * self.zeta * float(r @ r)
        return val

    def value(self, x: np.ndarray) -> float:
        return self.smooth_value(x) + self.g.value(x)


def fista_solve(sub: QuadraticCompositeSubproblem, warm_start: np.ndarray,
                config: InnerSolverConfig) -> tuple[np.ndarray, int, bool]:
    """Accelerated proximal gradient on the subproblem.

    Prox steps of length 1/L on g with Nesterov momentum, stopping once the
    relative-change criterion ||x_j - x_{j-1}|| / max(||x_{j-1}||, 1) <=
    subtol holds on two consecutive iterations.  A single small step is not
    trusted: the momentum makes the iterates oscillate, and one small
    difference can be a turning point rather than convergence.  Returns
    (x, iterations, converged); on hitting ``max_inner`` the last iterate is
    returned with converged = False.
    """
    L = sub.smooth_lipschitz()
    step = 1.0 / L
    x_prev = np.asarray(warm_start, dtype=float).copy()
    y = x_prev.copy()
    t = 1.0
    hits = 0
    for j in range(1, config.max_inner + 1):
        x = sub.g.prox(y - step * sub.smooth_grad(y), step)
        rel_change = np.linalg.norm(x - x_prev) / max(np.linalg.norm(x_prev), 1.0)
        hits = hits + 1 if rel_change <= config.subtol else 0
        if hits >= 2 or (hits and j == 1):
            return x, j, True
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x + ((t - 1.0) / t_new) * (x - x_prev)
        x_prev = x
        t = t_new
    return x_prev, config.max_inner, False


def _baseline_trace(solver: str, problem: CompositeProblem, x: np.ndarray,
                    k: int, t_k: float, step: float, ref_value: float | None,
                    eq_op: LinearMap | None, eq_rhs: np.ndarray | None,
                    wall_ms: float, trace: MetricsTrace) -> None:
    obj = problem.objective(x)
    feas = np.nan
    if eq_op is not None:
        feas = float(np.linalg.norm(eq_op.matvec(x) - eq_rhs))
    elif problem.dim_dual:
        feas = float(np.linalg.norm(problem.residual(x)))
    obj_res = abs(obj - ref_value) if ref_value is not None else np.nan
    trace.objective.append(obj)
    trace.append(k=k, t_k=t_k, beta_k=step, obj_residual=obj_res,
                 feas_violation=feas, wall_ms=wall_ms)


def fista_baseline(problem: CompositeProblem, step: float, max_iter: int,
                   x0: np.ndarray | None = None, ref_value: float | None = None,
                   eq_op: LinearMap | None = None,
                   eq_rhs: np.ndarray | None = None,
                   record_walltime: bool = False) -> MetricsTrace:
    """Plain FISTA on f + g with constant step.

    Requires an unconstrained problem (dim_dual = 0).  The trace records the
    objective per iterate; when (eq_op, eq_rhs) are given, the
    feas_violation column reports ||eq_op x_k - eq_rhs|| so the run can be
    compared against equality-constrained solvers on the same instance.
    """
    if problem.dim_dual != 0:
        raise ValueError("fista_baseline needs an unconstrained problem (m = 0)")
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    x_prev = np.zeros(problem.dim_primal) if x0 is None else np.asarray(x0, dtype=float).copy()
    trace = MetricsTrace(solver="fista")
    started = time.perf_counter()
    _baseline_trace("fista", problem, x_prev, 1, 1.0, step, ref_value,
                    eq_op, eq_rhs, 0.0, trace)
    y = x_prev.copy()
    t = 1.0
    for k in range(1, max_iter + 1):
        x = problem.g.prox(y - step * problem.f_grad(y), step)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x + ((t - 1.0) / t_new) * (x - x_prev)
        trace.dx_norm.append(float(np.linalg.norm(x - x_prev)))
        x_prev = x
        t = t_new
        wall = (time.perf_counter() - started) * 1e3 if record_walltime else 0.0
        _baseline_trace("fista", problem, x, k + 1, t, step, ref_value,
                        eq_op, eq_rhs, wall, trace)
    trace.cert_data["x_final"] = x_prev
    return trace


def afbm_baseline(problem: CompositeProblem, step: float, alpha: float,
                  max_iter: int, x0: np.ndarray | None = None,
                  ref_value: float | None = None,
                  eq_op: LinearMap | None = None,
                  eq_rhs: np.ndarray | None = None,
                  record_walltime: bool = False) -> MetricsTrace:
    """Inertial forward-backward with momentum (k-1)/(k+alpha-1).

    Same trace conventions as fista_baseline; the momentum coefficient is 0
    at k = 1 and tends to 1 from below, reducing to plain proximal gradient
    as alpha -> inf.
    """
    if problem.dim_dual != 0:
        raise ValueError("afbm_baseline needs an unconstrained problem (m = 0)")
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    if alpha < 3:
        raise ValueError(f"alpha must be >= 3, got {alpha}")
    x_prev = np.zeros(problem.dim_primal) if x0 is None else np.asarray(x0, dtype=float).copy()
    x_prev2 = x_prev.copy()
    trace = MetricsTrace(solver="afbm")
    started = time.perf_counter()
    _baseline_trace("afbm", problem, x_prev, 1, 0.0, step, ref_value,
                    eq_op, eq_rhs, 0.0, trace)
    for k in range(1, max_iter + 1):
        momentum = (k - 1.0) / (k + alpha - 1.0)
        y = x_prev + momentum * (x_prev - x_prev2)
        x = problem.g.prox(y - step * problem.f_grad(y), step)
        trace.dx_norm.append(float(np.linalg.norm(x - x_prev)))
        x_prev2, x_prev = x_prev, x
        wall = (time.perf_counter() - started) * 1e3 if record_walltime else 0.0
        _baseline_trace("afbm", problem, x, k + 1, momentum, step, ref_value,
                        eq_op, eq_rhs, wall, trace)
    trace.cert_data["x_final"] = x_prev
    return trace
