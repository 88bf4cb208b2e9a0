"""Tail bound, center bound and admissibility checks for one candidate (t, tau, b).

Every formula is written once against numpy arrays so that the grid search in
:mod:`nonuniform_be.optimizer` and the scalar API below share the exact same
arithmetic. The tail exponent parameter ``c`` is fixed to 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .ranges import ParamRanges, Tau1Rule, check_t, param_ranges

UNIFORM_CONSTANT = 0.7655
NONUNIFORM_CONSTANT = 29.1174
SHIFT_CONSTANT = 1.531  # 2 * UNIFORM_CONSTANT, as printed
TAIL_FACTOR = 1.0 + math.e
C_PARAM = 1.0

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

CONDITION_NAMES = (
    "range_tau",
    "range_b",
    "cond_term7",
    "cond_21",
    "cond_22",
    "cond_form4",
    "cond_form4abc",
    "positivity_guard",
)


class InfeasibleError(ValueError):
    """Raised when a candidate fails at least one admissibility condition."""

    def __init__(self, report: "FeasibilityReport"):
        self.report = report
        failed = ", ".join(report.failed()) or "none"
        super().__init__(f"infeasible parameters (failed: {failed})")


@dataclass(frozen=True)
class BoundParams:
    """Evaluation point ``t`` and truncation parameters ``tau``, ``b``.

    The truncation level is h = tau*sqrt(n)*t, the tilt is s = (1-tau)*t/sqrt(n)
    and r = (1-tau)*t. None of them is stored: the bound only ever uses the
    n-free products s*h = tau*(1-tau)*t^2 and r^2 = (1-tau)^2*t^2.
    """

    t: float
    tau: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "t", check_t(self.t))
        tau, b = float(self.tau), float(self.b)
        if not 0.0 < tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1) (got {tau!r})")
        if not (math.isfinite(b) and b > C_PARAM):
            raise ValueError(f"b must be finite and > {C_PARAM} (got {b!r})")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "b", b)

    @property
    def c(self) -> float:
        return C_PARAM


@dataclass(frozen=True)
class Condition:
    satisfied: bool
    margin: float  # rhs - lhs; negative means violated


@dataclass(frozen=True)
class FeasibilityReport:
    range_tau: Condition
    range_b: Condition
    cond_term7: Condition
    cond_21: Condition
    cond_22: Condition
    cond_form4: Condition
    cond_form4abc: Condition
    positivity_guard: Condition

    @property
    def feasible(self) -> bool:
        return all(getattr(self, name).satisfied for name in CONDITION_NAMES)

    def failed(self) -> list[str]:
        return [name for name in CONDITION_NAMES if not getattr(self, name).satisfied]

    def as_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in CONDITION_NAMES}


@dataclass(frozen=True)
class CenterQuantities:
    gamma: float
    beta_hi: float
    mu_hi: float
    m2_lo: float
    m2_hi: float
    delta2_lo: float
    alpha: tuple[float, float, float, float]
    big_delta: float
    eta: float

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["alpha"] = list(self.alpha)
        return d


@dataclass(frozen=True)
class BoundResult:
    t: float
    tau: float
    b: float
    b_tail: float
    b_center: float
    c_value: float
    nonuniform_at_t: float
    nagaev_at_t: float
    uniform_ref: float = UNIFORM_CONSTANT

    def as_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# vectorized core
# ---------------------------------------------------------------------------

def _errstate():
    return np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore")


def gamma_fn(t, b):
    """c (t/b)^3 exp{2(c-b)(t/b)^2}; accepts scalars or arrays."""
    with _errstate():
        u = np.asarray(t, dtype=np.float64) / b
        return C_PARAM * u**3 * np.exp(2.0 * (C_PARAM - b) * u * u)


def _growth(t, tau, b):
    # exp{t^2 (tau(1-tau) + 2(c-b)/b^2)}
    return np.exp(t * t * (tau * (1.0 - tau) + 2.0 * (C_PARAM - b) / (b * b)))


def center_arrays(t, tau, b) -> dict:
    """All center-branch quantities for broadcastable (t, tau, b)."""
    t = np.asarray(t, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with _errstate():
        g = gamma_fn(t, b)
        growth = _growth(t, tau, b)
        b3 = b**3
        beta_hi = 1.0 + g * g * ((1.0 - tau) ** 2 * t * t / 2.0 + C_PARAM * growth / (tau**3 * b3))
        mu_hi = t * g * (1.0 - tau + C_PARAM * growth / (tau * tau * b3))
        m2_lo = 1.0 - (g / t) * (1.0 / tau + (1.0 - tau) * t * t)
        # gamma * exp(tau(1-tau)t^2) folded into growth to avoid 0 * inf
        m2_hi = 1.0 + C_PARAM * (t / b) ** 3 * growth / (t * tau)
        delta2_lo = 1.0 + m2_lo - beta_hi - mu_hi * mu_hi
        decay = np.exp(-0.5 * (1.0 - tau) ** 2 * t * t)
        alpha = tuple(t ** (3 - k) * tau ** (-k) * decay for k in range(4))
        log_big_delta = C_PARAM * growth / (tau**3 * b3)
        big_delta = np.exp(log_big_delta)
        root_m2 = np.sqrt(m2_hi)
        eta = mu_hi * root_m2 * (3.0 * root_m2 + mu_hi * np.sqrt(beta_hi))
    return dict(
        gamma=g,
        growth=growth,
        beta_hi=beta_hi,
        mu_hi=mu_hi,
        m2_lo=m2_lo,
        m2_hi=m2_hi,
        delta2_lo=delta2_lo,
        alpha=alpha,
        big_delta=big_delta,
        log_big_delta=log_big_delta,
        eta=eta,
    )


def b_tail_fn(b):
    return np.asarray(b, dtype=np.float64) ** 3 * TAIL_FACTOR


def b_center_arrays(t, tau, q: dict):
    t = np.asarray(t, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    a0, a1, a2, _ = q["alpha"]
    with _errstate():
        delta_t2 = q["delta2_lo"] * t * t
        normal_block = a2 + 0.25 * a1 * t * (np.exp(-0.5 * t * t) + np.exp(-0.5 * delta_t2))
        denom = q["m2_lo"] - q["beta_hi"] * q["mu_hi"] ** 2
        shift_block = SHIFT_CONSTANT * np.sqrt(q["beta_hi"] / denom**3) * (
            a0 + q["eta"] * t**3 * np.exp(-0.5 * t * t * (1.0 - tau * tau))
        )
        # alpha_3 * Delta in one exponent: alpha_3 underflows while Delta overflows
        log_tilt = -0.5 * (1.0 - tau) ** 2 * t * t + q["log_big_delta"]
        a3_delta = np.exp(log_tilt) / tau**3
        return tau**-3 + a3_delta + _SQRT_2_OVER_PI * normal_block + shift_block


def margin_arrays(t, tau, b, q: dict, tau_lo, tau_hi, b_lo, b_hi) -> dict:
    """Signed margin (rhs - lhs) of every condition, plus its pass flag."""
    t = np.asarray(t, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = C_PARAM
    out = {}
    with _errstate():
        growth = q["growth"]
        b3 = b**3
        tt = t * t
        stau = tau * (1.0 - tau)
        tail_decay = np.exp(2.0 * (c - b) * tt / (b * b))

        m = np.minimum(tau_hi - tau, tau - tau_lo)
        out["range_tau"] = (m, m >= 0)
        m = np.minimum(b_hi - b, b - b_lo)
        out["range_b"] = (m, m >= 0)

        lhs = c * tail_decay * (tt + 2.0 * c * growth / (b3 * tau**3 * (1.0 - tau) ** 2))
        m = b3 * tau / 3.0 - lhs
        out["cond_term7"] = (m, m >= 0)

        m = tau**3 * (1.0 - tau) ** 2 * b3 * tt - 5.0 * c * growth
        out["cond_21"] = (m, m >= 0)

        m = 2.0 - (1.0 - tau) ** 2 * tau**3 * t**5 * np.exp(-stau * tt)
        out["cond_22"] = (m, m >= 0)

        lhs = (
            q["beta_hi"] - 1.0 + q["mu_hi"] ** 2
            + c * tt / b3 * tail_decay * (1.0 / tau + tt * (1.0 - tau))
        )
        m = 0.75 - lhs
        out["cond_form4"] = (m, m >= 0)

        ratio = c * growth / b3
        lhs = tau * t * q["gamma"] * (
            0.5 * tt * (1.0 - tau) ** 2
            + ratio / tau**3
            + tt * (1.0 - tau + ratio / (tau * tau)) ** 2
        )
        rhs = 0.5 * np.exp(tt * stau) - 1.0 - tt * stau
        m = rhs - lhs
        out["cond_form4abc"] = (m, m >= 0)

        denom = q["m2_lo"] - q["beta_hi"] * q["mu_hi"] ** 2
        m = np.minimum(denom, q["delta2_lo"] - 0.25)
        out["positivity_guard"] = (m, (denom > 0) & (q["delta2_lo"] >= 0.25))
    return out


# ---------------------------------------------------------------------------
# scalar API
# ---------------------------------------------------------------------------

def gamma(params: BoundParams) -> float:
    return float(gamma_fn(params.t, params.b))


def center_quantities(params: BoundParams) -> CenterQuantities:
    q = center_arrays(params.t, params.tau, params.b)
    return CenterQuantities(
        gamma=float(q["gamma"]),
        beta_hi=float(q["beta_hi"]),
        mu_hi=float(q["mu_hi"]),
        m2_lo=float(q["m2_lo"]),
        m2_hi=float(q["m2_hi"]),
        delta2_lo=float(q["delta2_lo"]),
        alpha=tuple(float(a) for a in q["alpha"]),
        big_delta=float(q["big_delta"]),
        eta=float(q["eta"]),
    )


def _q_dict(params: BoundParams, q: CenterQuantities) -> dict:
    d = {f.name: np.float64(getattr(q, f.name)) for f in fields(q) if f.name != "alpha"}
    d["alpha"] = tuple(np.float64(a) for a in q.alpha)
    with _errstate():
        t, tau, b = (np.float64(v) for v in (params.t, params.tau, params.b))
        d["growth"] = _growth(t, tau, b)
        d["log_big_delta"] = C_PARAM * d["growth"] / (tau**3 * b**3)
    return d


def check_feasibility(
    params: BoundParams,
    q: CenterQuantities | None = None,
    ranges: ParamRanges | None = None,
    tau1_rule: Tau1Rule = "sequential",
) -> FeasibilityReport:
    """Evaluate every admissibility condition literally, with zero slack."""
    if q is None:
        q = center_quantities(params)
    if ranges is None:
        ranges = param_ranges(params.t, tau1_rule)
    margins = margin_arrays(
        params.t,
        params.tau,
        params.b,
        _q_dict(params, q),
        ranges.tau_lo(params.b),
        ranges.tau_hi,
        ranges.b_lo,
        ranges.b_hi,
    )
    return FeasibilityReport(
        **{name: Condition(bool(ok), float(m)) for name, (m, ok) in margins.items()}
    )


def compute_bounds(
    params: BoundParams,
    q: CenterQuantities | None = None,
    report: FeasibilityReport | None = None,
    tau1_rule: Tau1Rule = "sequential",
) -> BoundResult:
    """C(t) = max(B_T, B_C) for a candidate; raises :class:`InfeasibleError` otherwise."""
    if q is None:
        q = center_quantities(params)
    if report is None:
        report = check_feasibility(params, q, tau1_rule=tau1_rule)
    if not report.feasible:
        raise InfeasibleError(report)
    b_tail = float(b_tail_fn(params.b))
    b_center = float(b_center_arrays(params.t, params.tau, _q_dict(params, q)))
    if not math.isfinite(b_center):
        # the optimizer masks these out too; never let max() hide a nan
        raise FloatingPointError(f"center bound is not finite at {params}")
    c_value = max(b_tail, b_center)
    t3 = params.t**3
    return BoundResult(
        t=params.t,
        tau=params.tau,
        b=params.b,
        b_tail=b_tail,
        b_center=b_center,
        c_value=c_value,
        nonuniform_at_t=c_value / t3,
        nagaev_at_t=NONUNIFORM_CONSTANT / (1.0 + t3),
    )


def evaluate(t: float, tau: float, b: float, tau1_rule: Tau1Rule = "sequential") -> BoundResult:
    return compute_bounds(BoundParams(t, tau, b), tau1_rule=tau1_rule)
