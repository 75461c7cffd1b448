"""Seeded problem generators and reference saddle points.

All randomness flows through named SplitMix64 streams derived from one
64-bit seed, so a (kind, dims, params, seed) tuple pins the generated data
bit-for-bit.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .problems import (CompositeProblem, LinearMap, SaddlePointCertificate,
                       certificate_for, quadratic_problem, zero_map)
from .prox import ProxFunction, l1, l1_plus_sql2, nonneg, prox_l1, ZERO
from .rng import stream
from .subsolvers import estimate_opnorm

# dimensions used in the reference experiments; desk scale mirrors them
# proportionally for fast runs
L1L2_FULL_DIMS = (1500, 2000)
L1L2_DESK_DIMS = (150, 200)
NNLS_FULL_DIMS = ((500, 1000), (1500, 2000))
NNLS_DESK_DIMS = (150, 200)
L1L2_DEFAULTS = dict(mu=1.5, sparsity=0.05, noise_norm=1e-6)


def gen_l1l2(m: int, n: int, mu: float = 1.5, sparsity: float = 0.05,
             noise_norm: float = 1e-6, seed: int = 0,
             f_split: str = "quadratic") -> tuple[CompositeProblem, np.ndarray]:
    """l1-l2 recovery instance:  min ||x||_1 + (mu/2)||x||^2  s.t.  Ax = b.

    A is standard Gaussian m-by-n; the planted signal is N(0, 4) clipped to
    [-2, 2] and sparsified to the given fraction of nonzeros; b = A x# + w
    with Gaussian noise w rescaled to exactly ``noise_norm``.

    ``f_split`` selects the oracle split of the same objective:
    "quadratic" puts (mu/2)||x||^2 into f (lipschitz mu) with g = ||.||_1;
    "prox" puts everything into g (f = 0, lipschitz 0), which keeps
    lipschitz_f * beta_k <= 1 satisfiable under growing time scaling.

    Returns (problem, planted signal).  The planted signal is not a saddle
    certificate; see :func:`l1l2_saddle`.
    """
    if not 0 < sparsity <= 1:
        raise ValueError(f"sparsity must be in (0, 1], got {sparsity}")
    if noise_norm < 0 or mu < 0:
        raise ValueError("mu and noise_norm must be >= 0")
    if f_split not in ("quadratic", "prox"):
        raise ValueError(f"unknown f_split {f_split!r}")

    A = stream(seed, "A").normal(m * n).reshape(m, n)
    x_true = np.clip(2.0 * stream(seed, "signal").normal(n), -2.0, 2.0)
    n_keep = int(round(sparsity * n))
    if n_keep < 1:
        warnings.warn("sparsity * n < 1; forcing one nonzero entry")
        n_keep = 1
    # keep the entries with the n_keep smallest stream draws (seeded support)
    order = np.argsort(stream(seed, "support").raw(n), kind="stable")
    mask = np.zeros(n, dtype=bool)
    mask[order[:n_keep]] = True
    x_true = np.where(mask, x_true, 0.0)
    noise = stream(seed, "noise").normal(m)
    nn = np.linalg.norm(noise)
    noise = noise * (noise_norm / nn) if nn > 0 else noise
    b = A @ x_true + noise

    meta = {"x_true": x_true, "noise": noise}
    if f_split == "quadratic":
        problem = CompositeProblem(
            dim_primal=n, dim_dual=m,
            f_value=lambda x: 0.5 * mu * float(x @ x),
            f_grad=lambda x: mu * x,
            lipschitz_f=mu, g=l1(1.0), op_A=LinearMap(A), rhs_b=b, meta=meta)
    else:
        problem = CompositeProblem(
            dim_primal=n, dim_dual=m,
            f_value=lambda x: 0.0,
            f_grad=lambda x: np.zeros_like(x),
            lipschitz_f=0.0, g=l1_plus_sql2(1.0, mu), op_A=LinearMap(A),
            rhs_b=b, meta=meta)
    return problem, x_true


def l1l2_saddle(problem: CompositeProblem,
                tol: float = 1e-12) -> SaddlePointCertificate:
    """High-accuracy saddle point of an l1-l2 instance via its smooth dual.

    For  min ||x||_1 + (mu/2)||x||^2  s.t. Ax = b  the dual function is
    smooth: D(lam) = sum_i ((|z_i| - 1)_+)^2 / (2 mu) + <b, lam> with
    z = -A* lam, primal recovery x(lam) = soft(z, 1)/mu, and
    grad D(lam) = b - A x(lam).  Independent of the iterative solvers:
    an L-BFGS warm-up locates the active support, then a semismooth Newton
    loop (Hessian A_S A_S'/mu on the support S) polishes grad D to ``tol``
    relative.  The result is validated through the KKT residual.
    """
    mu = _l1l2_mu(problem)
    A, b = problem.op_A, problem.rhs_b
    m = problem.dim_dual
    scale = max(1.0, float(np.linalg.norm(b)))

    def primal(lam):
        return prox_l1(-A.rmatvec(lam), 1.0) / mu

    def value_grad(lam):
        z = -A.rmatvec(lam)
        shrunk = np.maximum(np.abs(z) - 1.0, 0.0)
        return (float(shrunk @ shrunk) / (2.0 * mu) + float(b @ lam),
                b - A.matvec(primal(lam)))

    res = scipy.optimize.minimize(
        value_grad, np.zeros(m), jac=True, method="L-BFGS-B",
        options={"maxiter": 2000, "maxfun": 5000, "gtol": 1e-10, "ftol": 0.0,
                 "maxcor": 50})
    lam = res.x
    A_dense = A.dense()
    damping = 0.0
    for _ in range(100):
        z = -A.rmatvec(lam)
        grad = b - A.matvec(prox_l1(z, 1.0) / mu)
        if np.linalg.norm(grad) <= tol * scale:
            break
        support = np.abs(z) > 1.0
        H = A_dense[:, support] @ A_dense[:, support].T / mu
        try:
            step = np.linalg.solve(H + damping * np.eye(m), grad)
        except np.linalg.LinAlgError:
            damping = max(2.0 * damping, 1e-10)
            continue
        # backtrack on the dual value to stay globally convergent
        val0, _ = value_grad(lam)
        t_step = 1.0
        for _ in range(60):
            val1, _ = value_grad(lam - t_step * step)
            if val1 <= val0:
                break
            t_step *= 0.5
        lam = lam - t_step * step
    return certificate_for(problem, primal(lam), lam)


def _l1l2_mu(problem: CompositeProblem) -> float:
    if problem.g.kind == "l1" and problem.g.l1_weight == 1.0:
        if problem.lipschitz_f <= 0:
            raise ValueError("l1l2 instance needs mu > 0")
        return problem.lipschitz_f
    if problem.g.kind == "l1_sql2" and problem.g.l1_weight == 1.0:
        return problem.g.sql2_weight
    raise ValueError("not an l1-l2 instance")


def gen_nnls(m: int, n: int, density: float = 0.5, seed: int = 0,
             g_kind: str = "nonneg") -> CompositeProblem:
    """Least-squares instance  min (1/2)||Ax - b||^2 (+ indicator of x >= 0).

    A is sparse with the given nonzero fraction (Bernoulli mask), nonzeros
    uniform on [0, 0.1]; b is uniform on [0, 1).  The problem carries no
    equality constraint (dim_dual = 0); ``g_kind`` picks "nonneg" (default)
    or "zero".  lipschitz_f is the squared operator norm, estimated by power
    iteration.
    """
    if not 0 < density <= 1:
        raise ValueError(f"density must be in (0, 1], got {density}")
    if g_kind not in ("nonneg", "zero"):
        raise ValueError(f"g_kind must be 'nonneg' or 'zero', got {g_kind!r}")
    vals = 0.1 * stream(seed, "A").uniform(m * n)
    if density < 1.0:
        keep = stream(seed, "mask").uniform(m * n) < density
        rows, cols = np.nonzero(keep.reshape(m, n))
        A = sp.coo_matrix((vals[keep], (rows, cols)), shape=(m, n)).tocsr()
        data_op = LinearMap(A)
    else:
        data_op = LinearMap(vals.reshape(m, n))
    b = stream(seed, "b").uniform(m)
    return least_squares_problem(data_op, b,
                                 nonneg() if g_kind == "nonneg" else ZERO)


def least_squares_problem(data_op: LinearMap, obs: np.ndarray,
                          g: ProxFunction) -> CompositeProblem:
    """Unconstrained composite problem with f(x) = ||Mx - y||^2 / 2."""
    obs = np.asarray(obs, dtype=float).reshape(-1)
    m, n = data_op.shape
    if obs.shape[0] != m:
        raise ValueError("observation length does not match the operator")
    lip = estimate_opnorm(data_op) ** 2
    return CompositeProblem(
        dim_primal=n, dim_dual=0,
        f_value=lambda x: 0.5 * float(np.sum((data_op.matvec(x) - obs) ** 2)),
        f_grad=lambda x: data_op.rmatvec(data_op.matvec(x) - obs),
        lipschitz_f=lip, g=g, op_A=zero_map(n), rhs_b=np.zeros(0),
        meta={"data_op": data_op, "obs": obs})


def random_quadratic_with_saddle(n: int, m: int, seed: int = 0,
                                 cond_floor: float = 0.1) \
        -> tuple[CompositeProblem, SaddlePointCertificate]:
    """Random strongly convex quadratic with equality constraints and the
    analytic saddle point from the KKT linear system.

    f(x) = x'Qx/2 + q'x with Q = M M'/n + cond_floor I, A Gaussian with full
    row rank, b = A x_f for a random x_f (guaranteed feasible).  The saddle
    solves [[Q, A'], [A, 0]] (x*, lam*) = (-q, b).
    """
    if not 0 < m <= n:
        raise ValueError("need 0 < m <= n")
    M = stream(seed, "Q").normal(n * n).reshape(n, n)
    Q = M @ M.T / n + cond_floor * np.eye(n)
    q = stream(seed, "q").normal(n)
    A = stream(seed, "A").normal(m * n).reshape(m, n)
    b = A @ stream(seed, "feasible").normal(n)
    kkt = np.block([[Q, A.T], [A, np.zeros((m, m))]])
    sol = np.linalg.solve(kkt, np.concatenate([-q, b]))
    problem = quadratic_problem(Q, q, A, b)
    return problem, certificate_for(problem, sol[:n], sol[n:])


def scalar_instance() -> tuple[CompositeProblem, SaddlePointCertificate]:
    """The one-dimensional regression instance
    min x^2/2 s.t. x = 0, with saddle (0, 0)."""
    problem = quadratic_problem(Q=[[1.0]], q=[0.0], A=[[1.0]], b=[0.0])
    return problem, certificate_for(problem, [0.0], [0.0])
