"""Problem files: Matrix Market operator + JSON sidecar.

A problem is stored as ``PREFIX.mtx`` (the matrix, dense array or sparse
coordinate Matrix Market exchange format) plus ``PREFIX.json`` with fields::

    schema       "inertial-pd-problem/1"
    dim_primal   n
    dim_dual     m   (0 means no equality constraint)
    rho          default augmented-Lagrangian penalty
    f            {"kind": "zero"}
                 {"kind": "scaled_sqnorm", "weight": mu}        # (mu/2)||x||^2
                 {"kind": "least_squares", "obs": [...]}        # ||Mx-y||^2/2
    g            {"kind": "zero"|"l1"|"sql2"|"nonneg"|"l1_sql2",
                  "l1_weight": w, "sql2_weight": mu}
    b            right-hand side (length m)
    saddle       optional {"x": [...], "lambda": [...], "value": v}

When m > 0 the .mtx matrix is the constraint operator A; when m = 0 and f is
"least_squares" it is the data matrix M with observations in f.obs.  Only
oracle-free f kinds are representable; problems with callable f oracles
cannot round-trip through files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .generators import least_squares_problem
from .problems import (CompositeProblem, LinearMap, SaddlePointCertificate,
                       zero_map)
from .prox import ProxFunction, ZERO

SCHEMA = "inertial-pd-problem/1"


def _g_to_json(g: ProxFunction) -> dict:
    return {"kind": g.kind, "l1_weight": g.l1_weight,
            "sql2_weight": g.sql2_weight}


def _g_from_json(spec: dict) -> ProxFunction:
    return ProxFunction(spec["kind"], l1_weight=spec.get("l1_weight", 0.0),
                        sql2_weight=spec.get("sql2_weight", 0.0))


def save_problem(problem: CompositeProblem, prefix,
                 f_spec: dict | None = None, rho: float = 1.0,
                 saddle: SaddlePointCertificate | None = None) -> None:
    """Write PREFIX.mtx and PREFIX.json.

    ``f_spec`` declares the smooth part; if omitted it is inferred for the
    zero-f case only.
    """
    prefix = Path(prefix)
    mat = problem.op_A
    if f_spec is None:
        if "data_op" in problem.meta:
            f_spec = {"kind": "least_squares",
                      "obs": np.asarray(problem.meta["obs"]).tolist()}
        elif problem.lipschitz_f == 0.0:
            f_spec = {"kind": "zero"}
        else:
            raise ValueError("cannot infer f_spec; pass it explicitly")
    if problem.dim_dual == 0:
        if f_spec["kind"] != "least_squares":
            raise ValueError(
                "m = 0 problems are stored with the least-squares data "
                "matrix in the .mtx file; other f kinds have no matrix")
        mat = problem.meta["data_op"]
    meta = {
        "schema": SCHEMA,
        "dim_primal": problem.dim_primal,
        "dim_dual": problem.dim_dual,
        "rho": rho,
        "f": f_spec,
        "g": _g_to_json(problem.g),
        "b": problem.rhs_b.tolist(),
    }
    if saddle is not None:
        meta["saddle"] = {"x": saddle.x_star.tolist(),
                          "lambda": saddle.lambda_star.tolist(),
                          "value": saddle.opt_value}
    scipy.io.mmwrite(str(prefix.with_suffix(".mtx")),
                     mat._mat if isinstance(mat, LinearMap) else mat)
    prefix.with_suffix(".json").write_text(json.dumps(meta, indent=1))


def load_problem(prefix) -> tuple[CompositeProblem, float,
                                  SaddlePointCertificate | None]:
    """Read PREFIX.{mtx,json}; returns (problem, default rho, saddle or None)."""
    prefix = Path(prefix)
    meta = json.loads(prefix.with_suffix(".json").read_text())
    if meta.get("schema") != SCHEMA:
        raise ValueError(f"unrecognized problem schema {meta.get('schema')!r}")
    mat = scipy.io.mmread(str(prefix.with_suffix(".mtx")))
    op = LinearMap(mat.tocsr() if sp.issparse(mat) else np.asarray(mat))
    n, m = meta["dim_primal"], meta["dim_dual"]
    g = _g_from_json(meta["g"])
    f_spec = meta["f"]
    b = np.asarray(meta["b"], dtype=float)

    if m == 0:
        if f_spec["kind"] != "least_squares":
            raise ValueError("m = 0 problem files must use least_squares f")
        problem = least_squares_problem(op, np.asarray(f_spec["obs"]), g)
    elif f_spec["kind"] == "zero":
        problem = CompositeProblem(
            dim_primal=n, dim_dual=m, f_value=lambda x: 0.0,
            f_grad=lambda x: np.zeros_like(x), lipschitz_f=0.0,
            g=g, op_A=op, rhs_b=b)
    elif f_spec["kind"] == "scaled_sqnorm":
        w = float(f_spec["weight"])
        problem = CompositeProblem(
            dim_primal=n, dim_dual=m,
            f_value=lambda x: 0.5 * w * float(x @ x),
            f_grad=lambda x: w * x, lipschitz_f=w,
            g=g, op_A=op, rhs_b=b)
    else:
        raise ValueError(f"unsupported f kind {f_spec['kind']!r} for m > 0")

    saddle = None
    if "saddle" in meta:
        s = meta["saddle"]
        saddle = SaddlePointCertificate(
            np.asarray(s["x"], dtype=float),
            np.asarray(s["lambda"], dtype=float), float(s["value"]))
    return problem, float(meta.get("rho", 1.0)), saddle


def save_l1l2(problem: CompositeProblem, prefix, rho: float = 1.0,
              saddle: SaddlePointCertificate | None = None) -> None:
    """Store an l1-l2 instance (quadratic-f split)."""
    save_problem(problem, prefix,
                 f_spec={"kind": "scaled_sqnorm", "weight": problem.lipschitz_f},
                 rho=rho, saddle=saddle)
