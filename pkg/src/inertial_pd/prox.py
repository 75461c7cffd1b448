"""Closed-form proximal maps and Moreau-Yosida smoothing.

All maps operate componentwise on numpy arrays (scalars are promoted).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def prox_l1(z, threshold):
    """Soft-thresholding: sign(z) * max(|z| - threshold, 0)."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - threshold, 0.0)


def prox_nonneg(z):
    """Projection onto the non-negative orthant."""
    return np.maximum(np.asarray(z, dtype=float), 0.0)


@dataclass(frozen=True)
class ProxFunction:
    """Convex regularizer with value and prox oracles.

    kind is one of "zero", "l1", "sql2", "nonneg", "l1_sql2"; the combined
    kind is w*||x||_1 + (mu/2)||x||^2, whose prox is shrink-then-scale:
    prox_{s g}(z) = prox_l1(z, s*w) / (1 + s*mu).
    """

    kind: str = "zero"
    l1_weight: float = 0.0
    sql2_weight: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "l1", "sql2", "nonneg", "l1_sql2"):
            raise ValueError(f"unknown prox kind {self.kind!r}")
        if self.l1_weight < 0 or self.sql2_weight < 0:
            raise ValueError("prox weights must be >= 0")

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return 0.0
        if self.kind == "l1":
            return self.l1_weight * float(np.sum(np.abs(x)))
        if self.kind == "sql2":
            return 0.5 * self.sql2_weight * float(x @ x)
        if self.kind == "nonneg":
            return 0.0 if np.all(x >= 0.0) else np.inf
        return (self.l1_weight * float(np.sum(np.abs(x)))
                + 0.5 * self.sql2_weight * float(x @ x))

    def prox(self, z, step: float):
        """prox_{step * g}(z)."""
        z = np.asarray(z, dtype=float)
        if step <= 0:
            raise ValueError(f"prox step must be > 0, got {step}")
        if self.kind == "zero":
            return z.copy()
        if self.kind == "l1":
            return prox_l1(z, step * self.l1_weight)
        if self.kind == "sql2":
            return z / (1.0 + step * self.sql2_weight)
        if self.kind == "nonneg":
            return prox_nonneg(z)
        return prox_l1(z, step * self.l1_weight) / (1.0 + step * self.sql2_weight)


ZERO = ProxFunction("zero")


def l1(weight: float = 1.0) -> ProxFunction:
    return ProxFunction("l1", l1_weight=weight)


def sql2(weight: float) -> ProxFunction:
    return ProxFunction("sql2", sql2_weight=weight)


def nonneg() -> ProxFunction:
    return ProxFunction("nonneg")


def l1_plus_sql2(l1_weight: float, sql2_weight: float) -> ProxFunction:
    return ProxFunction("l1_sql2", l1_weight=l1_weight, sql2_weight=sql2_weight)


@dataclass(frozen=True)
class MoreauParams:
    """Smoothing parameter for the Moreau-Yosida envelope."""

    gamma: float = 1e-3

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


def moreau_grad(g: ProxFunction, params: MoreauParams, x) -> np.ndarray:
    """Gradient of the envelope: (x - prox_{gamma g}(x)) / gamma.

    The map is (1/gamma)-Lipschitz.
    """
    x = np.asarray(x, dtype=float)
    return (x - g.prox(x, params.gamma)) / params.gamma


def moreau_value(g: ProxFunction, params: MoreauParams, x) -> float:
    """Envelope value g(p) + ||x - p||^2 / (2 gamma) at p = prox_{gamma g}(x)."""
    x = np.asarray(x, dtype=float)
    p = g.prox(x, params.gamma)
    d = x - p
    return g.value(p) + float(d @ d) / (2.0 * params.gamma)
