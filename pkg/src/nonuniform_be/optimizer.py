"""Grid search over (tau, b) minimising C(t), and table generation."""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np

from .bound import (
    NONUNIFORM_CONSTANT,
    BoundParams,
    BoundResult,
    b_center_arrays,
    b_tail_fn,
    center_arrays,
    compute_bounds,
    margin_arrays,
)
from .ranges import ParamRanges, Tau1Rule, param_ranges

DEFAULT_STEP = 0.001
_CHUNK = 32  # b values evaluated per vectorized batch


class NoFeasibleCandidate(ValueError):
    pass


@dataclass(frozen=True)
class OptimizationResult:
    t: float
    feasible: bool
    best_tau: float | None
    best_b: float | None
    c_value: float
    evaluations: int
    feasible_count: int
    bound: BoundResult | None = None

    def as_dict(self) -> dict:
        d = asdict(self)
        if not self.feasible:
            d["c_value"] = None
        return d


@dataclass(frozen=True)
class TableRow:
    t: float
    tau: float | None
    b: float | None
    c_value: float | None
    c_over_t3: float | None
    nagaev: float
    feasible: bool


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Closed grid lo, lo+step, ... capped at hi, always including hi.

    Halving ``step`` yields a superset of the original points.
    """
    if not step > 0:
        raise ValueError(f"step must be positive (got {step!r})")
    if hi < lo:
        return np.empty(0)
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = np.minimum(lo + step * np.arange(n + 1), hi)
    if pts[-1] < hi:
        pts = np.append(pts, hi)
    return pts


def _tau_grid(ranges: ParamRanges, b: float, step: float) -> np.ndarray:
    lo = max(ranges.tau_lo(b), np.nextafter(0.0, 1.0))
    return grid(lo, ranges.tau_hi, step)


def _evaluate_batch(t, taus, bs, tau_lo, ranges: ParamRanges):
    q = center_arrays(t, taus, bs)
    margins = margin_arrays(t, taus, bs, q, tau_lo, ranges.tau_hi, ranges.b_lo, ranges.b_hi)
    ok = np.ones(taus.shape, dtype=bool)
    for _, passed in margins.values():
        ok &= passed
    c = np.maximum(b_tail_fn(bs), b_center_arrays(t, taus, q))
    ok &= np.isfinite(c)
    return np.where(ok, c, np.inf), ok


def optimize(
    t: float,
    tau_step: float = DEFAULT_STEP,
    b_step: float = DEFAULT_STEP,
    tau1_rule: Tau1Rule = "sequential",
) -> OptimizationResult:
    """Minimise C(t) over the admissible (tau, b) grid.

    b runs in the outer loop (ascending), tau in the inner loop. Ties are
    broken towards smaller b, then smaller tau. Because C >= b^3(1+e) and that
    tail term grows with b, the scan stops as soon as the tail term alone
    reaches the best value found; this never changes the result.
    """
    if not (tau_step > 0 and b_step > 0):
        raise ValueError("grid steps must be positive")
    ranges = param_ranges(t, tau1_rule)
    t = ranges.t
    bs = grid(ranges.b_lo, ranges.b_hi, b_step)
    best = (math.inf, math.nan, math.nan)
    evaluations = feasible_count = 0

    for start in range(0, bs.size, _CHUNK):
        chunk = bs[start:start + _CHUNK]
        if float(b_tail_fn(chunk[0])) >= best[0]:
            break
        tau_parts, b_parts, lo_parts = [], [], []
        for b in chunk:
            taus = _tau_grid(ranges, float(b), tau_step)
            tau_parts.append(taus)
            b_parts.append(np.full(taus.size, b))
            lo_parts.append(np.full(taus.size, ranges.tau_lo(float(b))))
        taus = np.concatenate(tau_parts)
        if taus.size == 0:
            continue
        b_arr = np.concatenate(b_parts)
        c, ok = _evaluate_batch(t, taus, b_arr, np.concatenate(lo_parts), ranges)
        evaluations += taus.size
        feasible_count += int(ok.sum())
        i = int(np.argmin(c))  # first minimum = smallest (b, tau) among ties
        if c[i] < best[0]:
            best = (float(c[i]), float(taus[i]), float(b_arr[i]))

    if not math.isfinite(best[0]):
        return OptimizationResult(t, False, None, None, math.inf, evaluations, feasible_count)
    bound = compute_bounds(BoundParams(t, best[1], best[2]), tau1_rule=tau1_rule)
    return OptimizationResult(
        t=t,
        feasible=True,
        best_tau=best[1],
        best_b=best[2],
        c_value=bound.c_value,
        evaluations=evaluations,
        feasible_count=feasible_count,
        bound=bound,
    )


def make_table(
    t_values: Iterable[float],
    tau_step: float = DEFAULT_STEP,
    b_step: float = DEFAULT_STEP,
    tau1_rule: Tau1Rule = "sequential",
) -> list[TableRow]:
    rows = []
    for t in t_values:
        res = optimize(t, tau_step, b_step, tau1_rule)
        t = res.t
        nagaev = NONUNIFORM_CONSTANT / (1.0 + t**3)
        if res.feasible:
            rows.append(TableRow(t, res.best_tau, res.best_b, res.c_value,
                                 res.c_value / t**3, nagaev, True))
        else:
            rows.append(TableRow(t, None, None, None, None, nagaev, False))
    return rows


def format_row(row: TableRow) -> dict[str, str]:
    """Table print precision: 4 decimals for tau, b, C; 8 for the bound columns."""
    def fmt(x, digits):
        return "infeasible" if x is None else f"{x:.{digits}f}"

    return {
        "t": f"{row.t:.10g}",
        "tau": fmt(row.tau, 4),
        "b": fmt(row.b, 4),
        "C": fmt(row.c_value, 4),
        "C_over_t3": fmt(row.c_over_t3, 8),
        "nagaev": f"{row.nagaev:.8f}",
    }


@functools.lru_cache(maxsize=4096)
def optimal_c(
    t: float,
    tau_step: float = DEFAULT_STEP,
    b_step: float = DEFAULT_STEP,
    tau1_rule: Tau1Rule = "sequential",
) -> float:
    res = optimize(t, tau_step, b_step, tau1_rule)
    if not res.feasible:
        raise NoFeasibleCandidate(f"no admissible (tau, b) on the grid at t={t!r}")
    return res.c_value


def bound_function(
    tau_step: float = DEFAULT_STEP,
    b_step: float = DEFAULT_STEP,
    tau1_rule: Tau1Rule = "sequential",
) -> Callable[[float], float]:
    """Memoised t -> C(t) provider for the verifier and the CI bound."""
    return functools.partial(optimal_c, tau_step=tau_step, b_step=b_step, tau1_rule=tau1_rule)
