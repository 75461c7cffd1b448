"""Extrapolation sequences t_k and admissible time-scaling sequences beta_k.

The solver needs a nondecreasing sequence with t_{k+1}^2 - t_{k+1} <= t_k^2
and a nondecreasing beta_k with

    beta_{k-1} <= beta_k <= (t_k^2 / (t_{k+1} (t_{k+1} - 1))) * beta_{k-1}.

Three named extrapolation rules are built in; "custom" admits an explicit
sequence for testing.  Generators are deterministic iterators with no shared
mutable state, so independent solver runs never interact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

SLACK_TOL = 1e-12  # absolute tolerance on the t-recurrence slack


@dataclass(frozen=True)
class ExtrapolationRule:
    """kind in {"nesterov", "cd", "ac", "custom"}.

    "cd" is t_k = 1 + (k-1)/(alpha-1); "ac" is t_k = (k-1)/(alpha-1)
    reindexed to start at the first index with t >= 1 (see initial_t).
    Both require alpha >= 3.  "custom" wraps an explicit sequence
    (callable k -> t_k, 1-based) and is meant for tests.
    """

    kind: str
    alpha: float = 3.0
    custom: Callable[[int], float] | None = None

    def __post_init__(self):
        if self.kind not in ("nesterov", "cd", "ac", "custom"):
            raise ValueError(f"unknown extrapolation rule {self.kind!r}")
        if self.kind in ("cd", "ac") and self.alpha < 3.0:
            raise ValueError(f"rule {self.kind!r} requires alpha >= 3, got {self.alpha}")
        if self.kind == "custom" and self.custom is None:
            raise ValueError("custom rule needs an explicit sequence")


def nesterov_rule() -> ExtrapolationRule:
    return ExtrapolationRule("nesterov")


def chambolle_dossal_rule(alpha: float) -> ExtrapolationRule:
    return ExtrapolationRule("cd", alpha=alpha)


def attouch_cabot_rule(alpha: float) -> ExtrapolationRule:
    return ExtrapolationRule("ac", alpha=alpha)


def custom_rule(seq: Callable[[int], float] | Sequence[float]) -> ExtrapolationRule:
    if not callable(seq):
        values = list(seq)
        seq = lambda k: values[k - 1]  # noqa: E731
    return ExtrapolationRule("custom", custom=seq)


def initial_t(rule: ExtrapolationRule) -> float:
    """t_1.  Nesterov and cd start at 1; ac starts at floor(alpha)/(alpha-1),
    the first value of (k-1)/(alpha-1) that reaches 1, renumbered to k = 1."""
    if rule.kind == "custom":
        return float(rule.custom(1))
    if rule.kind == "ac":
        return math.floor(rule.alpha) / (rule.alpha - 1.0)
    return 1.0


def next_t(rule: ExtrapolationRule, k: int, t_k: float) -> float:
    """t_{k+1} from (k, t_k); k is 1-based."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if t_k < 1.0:
        raise ValueError(f"t_k must be >= 1, got {t_k}")
    if rule.kind == "nesterov":
        t = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_k * t_k))
        # the rounded root can overshoot the exact one by a few ulps, which
        # would break t^2 - t <= t_k^2 in floats; any value at or below the
        # root is admissible, so step down until the inequality holds
        while t * t - t - t_k * t_k > 0.0:
            t = math.nextafter(t, 0.0)
        return t
    if rule.kind == "cd":
        return 1.0 + k / (rule.alpha - 1.0)
    if rule.kind == "ac":
        return (math.floor(rule.alpha) + k) / (rule.alpha - 1.0)
    return float(rule.custom(k + 1))


@dataclass(frozen=True)
class RuleCertificate:
    """Outcome of checking t_{k+1}^2 - t_{k+1} - t_k^2 <= 0 over a horizon."""

    ok: bool
    horizon: int
    tau_hat: float            # min_{k <= horizon} t_k / k
    worst_slack: float        # max over k of the recurrence slack
    first_violation: int | None = None
    violation_slack: float | None = None


def recurrence_slack(t_k: float, t_k1: float) -> float:
    """t_{k+1}^2 - t_{k+1} - t_k^2; admissible iff <= 0."""
    return t_k1 * t_k1 - t_k1 - t_k * t_k


def validate_rule(rule: ExtrapolationRule, horizon: int) -> RuleCertificate:
    """Check the recurrence condition (to SLACK_TOL) and monotonicity over
    ``horizon`` indices, and report the empirical linear-growth ratio."""
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2, got {horizon}")
    t = initial_t(rule)
    tau_hat = t / 1.0
    worst = -math.inf
    for k in range(1, horizon):
        t1 = next_t(rule, k, t)
        slack = recurrence_slack(t, t1)
        worst = max(worst, slack)
        if slack > SLACK_TOL or t1 < t - SLACK_TOL:
            return RuleCertificate(False, horizon, tau_hat, worst,
                                   first_violation=k, violation_slack=slack)
        t = t1
        tau_hat = min(tau_hat, t / (k + 1))
    return RuleCertificate(tau_hat > 0.0, horizon, tau_hat, worst)


def beta_upper_factor(t_k: float, t_k1: float) -> float:
    """Cap t_k^2 / (t_{k+1} (t_{k+1} - 1)); +inf when t_{k+1} = 1."""
    if t_k < 1.0 or t_k1 < 1.0:
        raise ValueError("t values must be >= 1")
    denom = t_k1 * (t_k1 - 1.0)
    if denom == 0.0:
        return math.inf
    return t_k * t_k / denom


@dataclass(frozen=True)
class ScalingPolicy:
    """kind in {"constant", "power"}; "power" grows by ((k+1)/k)^p before
    the cap clamps it, so an unclamped run gives beta_k = beta0 (k+1)^p."""

    kind: str = "constant"
    beta0: float = 1.0
    power: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "power"):
            raise ValueError(f"unknown scaling policy {self.kind!r}")
        if self.beta0 <= 0:
            raise ValueError(f"beta0 must be > 0, got {self.beta0}")
        if self.power < 0:
            raise ValueError(f"power must be >= 0, got {self.power}")


def constant_beta(beta0: float) -> ScalingPolicy:
    return ScalingPolicy("constant", beta0=beta0)


def power_beta(beta0: float, power: float) -> ScalingPolicy:
    return ScalingPolicy("power", beta0=beta0, power=power)


def next_beta(policy: ScalingPolicy, beta_prev: float, factor_cap: float,
              k: int) -> float:
    """beta_k from beta_{k-1}: grow per policy, clamp at the cap, never
    decrease."""
    if beta_prev <= 0:
        raise ValueError(f"beta_prev must be > 0, got {beta_prev}")
    if policy.kind == "constant":
        candidate = beta_prev
    else:
        candidate = beta_prev * ((k + 1) / k) ** policy.power
    if math.isfinite(factor_cap):
        candidate = min(candidate, factor_cap * beta_prev)
    return max(candidate, beta_prev)


class ScheduleState:
    """Joint (t_k, t_{k+1}, beta_k) iterator for a run.

    ``advance()`` moves k -> k+1, recomputing the cap from the fresh t pair
    and validating the recurrence; an inadmissible step raises ValueError
    with the offending index and slack.
    """

    def __init__(self, rule: ExtrapolationRule, policy: ScalingPolicy):
        self.rule = rule
        self.policy = policy
        self.k = 1
        self.t_cur = initial_t(rule)
        self.t_next = next_t(rule, 1, self.t_cur)
        self._check(1, self.t_cur, self.t_next)
        self.beta_prev = policy.beta0
        self.beta_cur = next_beta(policy, policy.beta0,
                                  beta_upper_factor(self.t_cur, self.t_next), 1)

    @staticmethod
    def _check(k: int, t_k: float, t_k1: float) -> None:
        slack = recurrence_slack(t_k, t_k1)
        if slack > SLACK_TOL:
            raise ValueError(
                f"extrapolation rule violates t_(k+1)^2 - t_(k+1) <= t_k^2 "
                f"at k={k}: slack={slack:.3e}")
        if t_k1 < t_k - SLACK_TOL:
            raise ValueError(f"extrapolation sequence decreases at k={k}")

    def advance(self) -> None:
        k = self.k + 1
        t_new = next_t(self.rule, k, self.t_next)
        self._check(k, self.t_next, t_new)
        cap = beta_upper_factor(self.t_next, t_new)
        beta_new = next_beta(self.policy, self.beta_cur, cap, k)
        self.k = k
        self.t_cur, self.t_next = self.t_next, t_new
        self.beta_prev, self.beta_cur = self.beta_cur, beta_new
