"""Log-log slope fitting for empirical convergence rates."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RateFit:
    k_lo: int
    k_hi: int
    slope: float
    intercept: float
    r_squared: float


def fit_rate_slope(values: np.ndarray, window: tuple[int, int],
                   k: np.ndarray | None = None) -> RateFit:
    """Least-squares line through (log k, log value) over k in [k_lo, k_hi].

    ``values[i]`` corresponds to iterate ``k[i]`` (defaults to 1, 2, ...).
    Nonpositive values cannot enter the log fit; the window is shrunk to the
    positive entries with a warning.  An empty window is an error.
    """
    values = np.asarray(values, dtype=float)
    k = np.arange(1, values.size + 1) if k is None else np.asarray(k)
    k_lo, k_hi = window
    if k_lo < 1 or k_hi <= k_lo:
        raise ValueError(f"bad window {window}; need 1 <= k_lo < k_hi")
    mask = (k >= k_lo) & (k <= k_hi)
    if not mask.any():
        raise ValueError(f"window {window} selects no samples")
    positive = mask & (values > 0.0) & np.isfinite(values)
    if positive.sum() < mask.sum():
        warnings.warn(
            f"window shrunk from {int(mask.sum())} to {int(positive.sum())} "
            "samples (nonpositive values dropped)")
    if positive.sum() < 2:
        raise ValueError("fewer than 2 positive samples in the window")
    logk = np.log(k[positive].astype(float))
    logv = np.log(values[positive])
    design = np.column_stack([logk, np.ones_like(logk)])
    coef, *_ = np.linalg.lstsq(design, logv, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((logv - fitted) ** 2))
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(k_lo=int(k_lo), k_hi=int(k_hi), slope=float(coef[0]),
                   intercept=float(coef[1]), r_squared=r2)
