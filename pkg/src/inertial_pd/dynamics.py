"""Second-order primal-dual dynamics with vanishing damping and time scaling.

Integrates, with classical fixed-step RK4 on the first-order reformulation,

    xdd  = -(alpha/t) xd - beta(t) [grad f(x) + grad g_gamma(x)
             + A*(lam + (t/(alpha-1)) lamd) + rho A*(Ax - b)]
    lamdd = -(alpha/t) lamd + beta(t) [A(x + (t/(alpha-1)) xd) - b]

where g_gamma is the Moreau envelope of g (g = 0 skips smoothing) and
beta(t) = scale * t^power is non-decreasing.  The monitored energy is

    E(t) = (t^2 beta(t)/(alpha-1)^2) (L_rho^gamma(x, lam*) - L_rho^gamma(x*, lam*))
           + ||x - x* + (t/(alpha-1)) xd||^2 / 2
           + ||lam - lam* + (t/(alpha-1)) lamd||^2 / 2,

with the smoothed g_gamma inside the augmented Lagrangian, consistent with
the integrated system.  Fixed-step RK4 keeps traces reproducible.  Stepping
is pure over an immutable config, so parameter sweeps can run in parallel.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .problems import CompositeProblem, SaddlePointCertificate
from .prox import MoreauParams, moreau_grad, moreau_value


@dataclass(frozen=True)
class OdeConfig:
    alpha: float
    rho: float
    beta_scale: float = 1.0
    beta_power: float = 0.0
    gamma: MoreauParams = field(default_factory=MoreauParams)
    t0: float = 1.0
    t_end: float = 50.0
    step_h: float = 1e-3
    stride: int = 100   # record every this many steps

    def __post_init__(self):
        if self.alpha < 3:
            raise ValueError(f"alpha must be >= 3, got {self.alpha}")
        if self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        if self.beta_scale <= 0 or self.beta_power < 0:
            raise ValueError("beta schedule needs scale > 0 and power >= 0")
        # growth condition t beta'(t)/beta(t) = power <= alpha - 3
        if self.beta_power > self.alpha - 3 + 1e-12:
            raise ValueError(
                f"beta growth power {self.beta_power} exceeds alpha-3 = "
                f"{self.alpha - 3}")
        if self.t0 <= 0 or self.t_end <= self.t0:
            raise ValueError("need 0 < t0 < t_end")
        if not 0 < self.step_h <= self.t_end - self.t0:
            raise ValueError("need 0 < step_h <= t_end - t0")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def beta(self, t: float) -> float:
        return self.beta_scale * t ** self.beta_power


@dataclass
class TrajectoryRecord:
    t: float
    x: np.ndarray
    xdot: np.ndarray
    lam: np.ndarray
    lamdot: np.ndarray
    energy: float = np.nan
    gap: float = np.nan
    feas: float = np.nan
    obj_residual_smoothed: float = np.nan
    obj_residual: float = np.nan


def _smoothed_parts(problem: CompositeProblem, config: OdeConfig, x: np.ndarray):
    if problem.g.kind == "zero":
        return 0.0, np.zeros_like(x)
    return (moreau_value(problem.g, config.gamma, x),
            moreau_grad(problem.g, config.gamma, x))


def smoothed_aug_lagrangian(problem: CompositeProblem, config: OdeConfig,
                            x: np.ndarray, lam: np.ndarray) -> float:
    """f(x) + g_gamma(x) + <lam, Ax-b> + (rho/2)||Ax-b||^2."""
    g_val, _ = _smoothed_parts(problem, config, x)
    r = problem.residual(x)
    return (float(problem.f_value(x)) + g_val + float(lam @ r)
            + 0.5 * config.rho * float(r @ r))


def ode_rhs(t: float, x: np.ndarray, xdot: np.ndarray, lam: np.ndarray,
            lamdot: np.ndarray, config: OdeConfig,
            problem: CompositeProblem) -> tuple[np.ndarray, np.ndarray]:
    """Second derivatives (xddot, lamddot) of the smoothed system."""
    beta = config.beta(t)
    ext = t / (config.alpha - 1.0)
    _, g_grad = _smoothed_parts(problem, config, x)
    force = problem.f_grad(x) + g_grad + problem.op_A.rmatvec(lam + ext * lamdot)
    if config.rho:
        force = force + config.rho * problem.op_A.rmatvec(problem.residual(x))
    xddot = -(config.alpha / t) * xdot - beta * force
    lamddot = (-(config.alpha / t) * lamdot
               + beta * (problem.op_A.matvec(x + ext * xdot) - problem.rhs_b))
    return xddot, lamddot


def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def continuous_energy(record: TrajectoryRecord, config: OdeConfig,
                      problem: CompositeProblem,
                      saddle: SaddlePointCertificate) -> float:
    """Lyapunov energy at one trajectory record (smoothed Lagrangian gap
    plus primal and dual anchor distances)."""
    t = record.t
    ext = t / (config.alpha - 1.0)
    gap = (smoothed_aug_lagrangian(problem, config, record.x, saddle.lambda_star)
           - smoothed_aug_lagrangian(problem, config, saddle.x_star,
                                     saddle.lambda_star))
    dx = record.x - saddle.x_star + ext * record.xdot
    dl = record.lam - saddle.lambda_star + ext * record.lamdot
    return ((t * t * config.beta(t) / (config.alpha - 1.0) ** 2) * gap
            + 0.5 * float(dx @ dx) + 0.5 * float(dl @ dl))


def integrate(config: OdeConfig, problem: CompositeProblem,
              x0, xdot0=None, lam0=None, lamdot0=None,
              saddle: SaddlePointCertificate | None = None) -> list[TrajectoryRecord]:
    """Integrate from t0 to t_end, recording every ``stride`` steps plus the
    endpoint.  A non-finite state aborts, returning records up to the last
    finite one."""
    n, m = problem.dim_primal, problem.dim_dual
    x0 = np.asarray(x0, dtype=float).reshape(n)
    xdot0 = np.zeros(n) if xdot0 is None else np.asarray(xdot0, dtype=float).reshape(n)
    lam0 = np.zeros(m) if lam0 is None else np.asarray(lam0, dtype=float).reshape(m)
    lamdot0 = np.zeros(m) if lamdot0 is None else np.asarray(lamdot0, dtype=float).reshape(m)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        x, xd = y[:n], y[n:2 * n]
        lam, lamd = y[2 * n:2 * n + m], y[2 * n + m:]
        xdd, lamdd = ode_rhs(t, x, xd, lam, lamd, config, problem)
        return np.concatenate([xd, xdd, lamd, lamdd])

    def make_record(t: float, y: np.ndarray) -> TrajectoryRecord:
        rec = TrajectoryRecord(t=t, x=y[:n].copy(), xdot=y[n:2 * n].copy(),
                               lam=y[2 * n:2 * n + m].copy(),
                               lamdot=y[2 * n + m:].copy())
        rec.feas = float(np.linalg.norm(problem.residual(rec.x)))
        if saddle is not None:
            rec.energy = continuous_energy(rec, config, problem, saddle)
            rec.gap = (smoothed_aug_lagrangian(problem, config, rec.x,
                                               saddle.lambda_star)
                       - smoothed_aug_lagrangian(problem, config, saddle.x_star,
                                                 saddle.lambda_star))
            g_smooth, _ = _smoothed_parts(problem, config, rec.x)
            g_star_smooth, _ = _smoothed_parts(problem, config, saddle.x_star)
            fx = float(problem.f_value(rec.x))
            rec.obj_residual_smoothed = abs(
                fx + g_smooth - float(problem.f_value(saddle.x_star)) - g_star_smooth)
            rec.obj_residual = abs(problem.objective(rec.x) - saddle.opt_value)
        return rec

    y = np.concatenate([x0, xdot0, lam0, lamdot0])
    t = config.t0
    steps = max(1, int(round((config.t_end - config.t0) / config.step_h)))
    h = (config.t_end - config.t0) / steps
    records = [make_record(t, y)]
    for j in range(1, steps + 1):
        # overflow of a diverging state is caught below, not worth a warning
        with np.errstate(over="ignore", invalid="ignore"):
            y_new = rk4_step(rhs, t, y, h)
        if not np.all(np.isfinite(y_new)):
            break
        y = y_new
        t = config.t0 + j * h
        if j % config.stride == 0 or j == steps:
            records.append(make_record(t, y))
    return records


def energy_drift(records: list[TrajectoryRecord]) -> float:
    """Largest per-unit-time energy increase between consecutive records
    (0 for a perfectly non-increasing energy)."""
    worst = 0.0
    for prev, cur in zip(records, records[1:]):
        dt = cur.t - prev.t
        if dt > 0 and np.isfinite(cur.energy) and np.isfinite(prev.energy):
            worst = max(worst, (cur.energy - prev.energy) / dt)
    return worst


def rate_surrogate(records: list[TrajectoryRecord], config: OdeConfig) -> float:
    """sup_t t^2 beta(t) * gap(t); bounded by (alpha-1)^2 E(t0) when the
    energy is non-increasing."""
    return max((r.t ** 2 * config.beta(r.t) * r.gap for r in records),
               default=np.nan)


def feasibility_surrogate(records: list[TrajectoryRecord], config: OdeConfig) -> float:
    """sup_t t sqrt(beta(t)) ||Ax(t) - b||."""
    return max((r.t * math.sqrt(config.beta(r.t)) * r.feas for r in records),
               default=np.nan)


def feasibility_mass(records: list[TrajectoryRecord], config: OdeConfig,
                     t_lo: float, t_hi: float) -> float:
    """Trapezoidal quadrature of t beta(t) ||Ax(t)-b||^2 over [t_lo, t_hi]."""
    ts = np.array([r.t for r in records])
    vals = np.array([r.t * config.beta(r.t) * r.feas ** 2 for r in records])
    mask = (ts >= t_lo) & (ts <= t_hi)
    if mask.sum() < 2:
        return 0.0
    return float(np.trapezoid(vals[mask], ts[mask]))


def write_trajectory_csv(records: list[TrajectoryRecord], path,
                         dump_state: bool = False) -> None:
    """Base columns t, gap, feas, energy; ``dump_state`` appends the state."""
    header = ["t", "gap", "feas", "energy"]
    if dump_state:
        n = records[0].x.size
        m = records[0].lam.size
        header += [f"x_{i}" for i in range(n)] + [f"xdot_{i}" for i in range(n)]
        header += [f"lam_{i}" for i in range(m)] + [f"lamdot_{i}" for i in range(m)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [r.t, r.gap, r.feas, r.energy]
            if dump_state:
                row += [*r.x, *r.xdot, *r.lam, *r.lamdot]
            writer.writerow([f"{float(v):.17g}" for v in row])
