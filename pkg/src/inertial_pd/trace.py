"""Per-iteration metrics with a fixed CSV schema.

The CSV columns are the on-disk contract::

    k, t_k, beta_k, obj_residual, feas_violation, pd_gap,
    energy_total, energy_e0, energy_e1, energy_e2, inner_iters, wall_ms

Residual/gap/energy columns are NaN when no saddle certificate was supplied.
Extra diagnostics (raw objective values, summability increments, the scalars
feeding the feasibility-bound constant, inner-solver warnings) stay in memory
only.  Floats are written with repr-faithful %.17g so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = (
    "k", "t_k", "beta_k", "obj_residual", "feas_violation", "pd_gap",
    "energy_total", "energy_e0", "energy_e1", "energy_e2",
    "inner_iters", "wall_ms",
)


@dataclass
class MetricsTrace:
    solver: str = ""
    rows: list[dict] = field(default_factory=list)
    # in-memory diagnostics, not part of the CSV contract
    objective: list[float] = field(default_factory=list)
    t_next: list[float] = field(default_factory=list)
    du_sq: list[float] = field(default_factory=list)   # ||u_{k+1}-u_k||^2
    dv_sq: list[float] = field(default_factory=list)   # ||v_{k+1}-v_k||^2
    dx_norm: list[float] = field(default_factory=list)  # ||x_k - x_{k-1}||
    warnings: list[tuple[int, str]] = field(default_factory=list)
    cert_data: dict = field(default_factory=dict)

    def append(self, k: int, t_k: float = np.nan, beta_k: float = np.nan,
               obj_residual: float = np.nan, feas_violation: float = np.nan,
               pd_gap: float = np.nan, energy_total: float = np.nan,
               energy_e0: float = np.nan, energy_e1: float = np.nan,
               energy_e2: float = np.nan, inner_iters: int = 0,
               wall_ms: float = 0.0) -> None:
        self.rows.append({
            "k": k, "t_k": t_k, "beta_k": beta_k,
            "obj_residual": obj_residual, "feas_violation": feas_violation,
            "pd_gap": pd_gap, "energy_total": energy_total,
            "energy_e0": energy_e0, "energy_e1": energy_e1,
            "energy_e2": energy_e2, "inner_iters": inner_iters,
            "wall_ms": wall_ms,
        })

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        if name not in CSV_COLUMNS:
            raise KeyError(f"unknown trace column {name!r}")
        return np.array([row[name] for row in self.rows], dtype=float)

    def last(self, name: str) -> float:
        return self.rows[-1][name]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Load a trace CSV back as {column: array}."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {name: [] for name in header}
        for line in reader:
            for name, cell in zip(header, line):
                cols[name].append(float(cell))
    return {name: np.asarray(vals) for name, vals in cols.items()}
