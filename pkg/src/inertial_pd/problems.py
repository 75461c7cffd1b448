"""Constrained composite problems, Lagrangians, and optimality residuals.

The model is

    min_x  f(x) + g(x)   s.t.  A x = b,

with f differentiable (gradient lipschitz_f-Lipschitz), g a ProxFunction,
and A a linear operator with adjoint.  m = 0 (empty constraint) encodes an
unconstrained composite problem.

CompositeProblem instances are immutable after construction and safe to share
across concurrently running solvers; the f oracles must be re-entrant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .prox import ProxFunction


class LinearMap:
    """Dense or sparse matrix wrapped as an operator with adjoint.

    ``shape == (m, n)``; ``m = 0`` is legal and acts as the zero operator
    into a 0-dimensional space.
    """

    def __init__(self, mat):
        if sp.issparse(mat):
            self._mat = mat.tocsr()
        else:
            self._mat = np.atleast_2d(np.asarray(mat, dtype=float))
        self._gram = None
        self._gram_eigh = None

    @property
    def shape(self) -> tuple[int, int]:
        return self._mat.shape

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self._mat)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._mat @ x, dtype=float).reshape(self.shape[0])

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self._mat.T @ y, dtype=float).reshape(self.shape[1])

    def gram(self) -> np.ndarray:
        """Dense A^T A, built once and cached (A never changes)."""
        if self._gram is None:
            g = self._mat.T @ self._mat
            self._gram = g.toarray() if sp.issparse(g) else np.asarray(g)
        return self._gram

    def gram_eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigendecomposition of A^T A (cached); lets shifted systems
        (c I + zeta A^T A) x = r be solved exactly for any c, zeta."""
        if self._gram_eigh is None:
            w, v = np.linalg.eigh(self.gram())
            self._gram_eigh = (np.maximum(w, 0.0), v)
        return self._gram_eigh

    def dense(self) -> np.ndarray:
        return self._mat.toarray() if self.is_sparse else self._mat

    def nnz_fraction(self) -> float:
        m, n = self.shape
        if m * n == 0:
            return 0.0
        nnz = self._mat.nnz if self.is_sparse else int(np.count_nonzero(self._mat))
        return nnz / (m * n)


def zero_map(n: int) -> LinearMap:
    """The empty constraint operator (m = 0)."""
    return LinearMap(np.zeros((0, n)))


@dataclass(frozen=True)
class CompositeProblem:
    dim_primal: int
    dim_dual: int
    f_value: Callable[[np.ndarray], float]
    f_grad: Callable[[np.ndarray], np.ndarray]
    lipschitz_f: float
    g: ProxFunction
    op_A: LinearMap
    rhs_b: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # descriptive extras (e.g. the data matrix behind a least-squares f);
    # populated at construction, treated as read-only afterwards
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.dim_primal <= 0:
            raise ValueError("dim_primal must be positive")
        if self.dim_dual < 0:
            raise ValueError("dim_dual must be >= 0")
        if self.lipschitz_f < 0:
            raise ValueError("lipschitz_f must be >= 0")
        if self.op_A.shape != (self.dim_dual, self.dim_primal):
            raise ValueError(
                f"operator shape {self.op_A.shape} does not match "
                f"(m, n) = ({self.dim_dual}, {self.dim_primal})")
        b = np.asarray(self.rhs_b, dtype=float).reshape(-1)
        if b.shape[0] != self.dim_dual:
            raise ValueError(f"rhs_b has length {b.shape[0]}, expected {self.dim_dual}")
        object.__setattr__(self, "rhs_b", b)

    def residual(self, x: np.ndarray) -> np.ndarray:
        """A x - b."""
        return self.op_A.matvec(x) - self.rhs_b

    def objective(self, x: np.ndarray) -> float:
        """f(x) + g(x)."""
        return float(self.f_value(x)) + self.g.value(x)


def _check_dims(problem: CompositeProblem, x: np.ndarray, lam: np.ndarray):
    if x.shape != (problem.dim_primal,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.dim_primal},)")
    if lam.shape != (problem.dim_dual,):
        raise ValueError(f"lambda has shape {lam.shape}, expected ({problem.dim_dual},)")


def eval_lagrangian(problem: CompositeProblem, x, lam) -> float:
    """f(x) + g(x) + <lam, Ax-b>.  Returns +inf where g does."""
    return eval_aug_lagrangian(problem, 0.0, x, lam)


def eval_aug_lagrangian(problem: CompositeProblem, rho: float, x, lam) -> float:
    """f(x) + g(x) + <lam, Ax-b> + (rho/2)||Ax-b||^2.

    +inf is an absorbing sentinel when g(x) = +inf (indicator violated).
    """
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    x = np.asarray(x, dtype=float).reshape(-1)
    lam = np.asarray(lam, dtype=float).reshape(-1)
    _check_dims(problem, x, lam)
    gx = problem.g.value(x)
    if not np.isfinite(gx):
        return np.inf
    r = problem.residual(x)
    return (float(problem.f_value(x)) + gx + float(lam @ r)
            + 0.5 * rho * float(r @ r))


def kkt_residual(problem: CompositeProblem, x, lam,
                 probe_step: float | None = None) -> tuple[float, float]:
    """(stationarity, feasibility) optimality residuals at (x, lam).

    feasibility = ||Ax - b||.  Stationarity is the prox-gradient fixed-point
    residual ||x - prox_{s g}(x - s (grad f(x) + A* lam))|| / s with probe
    step s; it vanishes iff 0 is in grad f(x) + dg(x) + A* lam.  The default
    probe step is 1/max(lipschitz_f, 1).
    """
    if probe_step is None:
        probe_step = 1.0 / max(problem.lipschitz_f, 1.0)
    if probe_step <= 0:
        raise ValueError(f"probe_step must be > 0, got {probe_step}")
    x = np.asarray(x, dtype=float).reshape(-1)
    lam = np.asarray(lam, dtype=float).reshape(-1)
    _check_dims(problem, x, lam)
    feas = float(np.linalg.norm(problem.residual(x)))
    direction = problem.f_grad(x) + problem.op_A.rmatvec(lam)
    moved = problem.g.prox(x - probe_step * direction, probe_step)
    stat = float(np.linalg.norm(x - moved)) / probe_step
    return stat, feas


@dataclass(frozen=True)
class SaddlePointCertificate:
    """A claimed saddle point (x*, lambda*) with the optimal value f(x*)+g(x*)."""

    x_star: np.ndarray
    lambda_star: np.ndarray
    opt_value: float

    def validate(self, problem: CompositeProblem, tol_kkt: float = 1e-8,
                 tol_feas: float = 1e-10) -> None:
        """Raise ValueError unless the KKT residuals clear the tolerances."""
        stat, feas = kkt_residual(problem, self.x_star, self.lambda_star)
        if stat > tol_kkt or feas > tol_kkt:
            raise ValueError(
                f"certificate fails KKT check: stationarity={stat:.3e}, "
                f"feasibility={feas:.3e} (tol {tol_kkt:.1e})")
        if feas > tol_feas:
            raise ValueError(
                f"certificate infeasible: ||Ax*-b||={feas:.3e} > {tol_feas:.1e}")


def certificate_for(problem: CompositeProblem, x_star, lambda_star,
                    validate: bool = True) -> SaddlePointCertificate:
    x_star = np.asarray(x_star, dtype=float).reshape(-1)
    lambda_star = np.asarray(lambda_star, dtype=float).reshape(-1)
    cert = SaddlePointCertificate(x_star, lambda_star,
                                  problem.objective(x_star))
    if validate:
        cert.validate(problem)
    return cert


def quadratic_problem(Q: np.ndarray, q: np.ndarray, A, b,
                      g: ProxFunction = ProxFunction("zero")) -> CompositeProblem:
    """Problem with f(x) = x'Qx/2 + q'x (Q symmetric PSD) and operator A."""
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float).reshape(-1)
    n = q.shape[0]
    op = A if isinstance(A, LinearMap) else LinearMap(A)
    lip = float(np.linalg.norm(Q, 2)) if n else 0.0
    return CompositeProblem(
        dim_primal=n,
        dim_dual=op.shape[0],
        f_value=lambda x: 0.5 * float(x @ (Q @ x)) + float(q @ x),
        f_grad=lambda x: Q @ x + q,
        lipschitz_f=lip,
        g=g,
        op_A=op,
        rhs_b=b,
    )
