"""Admissible intervals for the truncation parameters (tau, b) at a point t."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

T_MIN = 3.18
B_MAX = (30.0 / (1.0 + math.e)) ** (1.0 / 3.0)

Tau1Rule = Literal["sequential", "per-b"]
TAU1_RULES = ("sequential", "per-b")


def check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < T_MIN:
        raise ValueError(f"t must be >= {T_MIN} (got {t!r})")
    return t


def tau_max(t: float) -> float:
    root = math.sqrt(1.0 - 10.0 / (t * t))
    return min(0.5 * (1.0 + root), 1.0 - math.sqrt(3.0) / t)


def tau_floor(t: float) -> float:
    """Lower root of tau*(1-tau) = 5/(2 t^2)."""
    return 0.5 * (1.0 - math.sqrt(1.0 - 10.0 / (t * t)))


def b_min(t: float) -> float:
    return 2.0 * t / (t + math.sqrt(t * t - 6.0))


def tau1(t: float, b: float) -> float:
    """Upper root of tau*(1-tau) = p with p = 2(b-1)/b^2 - 1/t^2, or -inf when 4p > 1."""
    p = 2.0 * (b - 1.0) / (b * b) - 1.0 / (t * t)
    if 4.0 * p > 1.0:
        return -math.inf
    return 0.5 * (1.0 + math.sqrt(1.0 - 4.0 * p))


@dataclass(frozen=True)
class ParamRanges:
    """Search box for one t.

    ``tau_lo`` depends on b only under the ``"per-b"`` rule. The default
    ``"sequential"`` rule evaluates tau1 at ``b_hi``, which is the only b
    known when the lower tau limit is computed.
    """

    t: float
    b_lo: float
    b_hi: float
    tau_hi: float
    tau_floor: float
    tau1_rule: Tau1Rule = "sequential"

    def tau1(self, b: float | None = None) -> float:
        if self.tau1_rule == "sequential" or b is None:
            return tau1(self.t, self.b_hi)
        return tau1(self.t, b)

    def tau_lo(self, b: float | None = None) -> float:
        return max(self.tau1(b), self.tau_floor)

    @property
    def nonempty_b(self) -> bool:
        return self.b_lo < self.b_hi


def param_ranges(t: float, tau1_rule: Tau1Rule = "sequential") -> ParamRanges:
    t = check_t(t)
    if tau1_rule not in TAU1_RULES:
        raise ValueError(f"tau1_rule must be one of {TAU1_RULES}, got {tau1_rule!r}")
    return ParamRanges(
        t=t,
        b_lo=b_min(t),
        b_hi=B_MAX,
        tau_hi=tau_max(t),
        tau_floor=tau_floor(t),
        tau1_rule=tau1_rule,
    )
