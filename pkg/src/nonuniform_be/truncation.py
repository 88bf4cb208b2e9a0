"""Closed-form envelopes for exponential moments of a truncated variable.

X has EX = 0, EX^2 = 1, E|X|^3 = rho, and Y = X * 1{|X| <= h}. For a tilt
s >= 0 the quantities bounded here are

    beta = E exp(sY),  m1 = E Y exp(sY),  m2 = E Y^2 exp(sY),
    m3 = E |Y|^3 exp(sY),  E |Y| exp(sY).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class TruncationInput:
    s: float
    h: float
    rho: float

    def __post_init__(self):
        s, h, rho = float(self.s), float(self.h), float(self.rho)
        if not (math.isfinite(s) and s >= 0):
            raise ValueError(f"tilt s must be finite and >= 0 (got {s!r})")
        if not (math.isfinite(h) and h > 0):
            raise ValueError(f"truncation level h must be finite and > 0 (got {h!r})")
        # rho >= (E X^2)^{3/2} = 1 by Hölder; smaller values are not a valid law
        if not (math.isfinite(rho) and rho >= 1):
            raise ValueError(f"rho must be finite and >= 1 (got {rho!r})")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class MomentEnvelope:
    beta_hi: float
    m1_hi: float
    m2_hi: float
    m3_hi: float
    abs_m1_hi: float
    m1_lo: float
    m2_lo: float  # lower bound on the tilted m2
    ey_lo: float
    ey2_lo: float
    ey3_lo: float

    def as_dict(self) -> dict:
        return asdict(self)


def moment_envelope(inp: TruncationInput) -> MomentEnvelope:
    s, h, rho = inp.s, inp.h, inp.rho
    sh = s * h
    growth = math.exp(sh)
    beta_hi = 1.0 + 0.5 * s * s + rho / h**3 * math.expm1(sh)
    m2_hi = 1.0 + rho / h * growth
    return MomentEnvelope(
        beta_hi=beta_hi,
        m1_hi=s + rho / (h * h) * growth,
        m2_hi=m2_hi,
        m3_hi=rho * growth,
        abs_m1_hi=math.sqrt(beta_hi * m2_hi),
        m1_lo=s - rho / (h * h) * (1.0 + sh + 0.5 * sh * sh),
        m2_lo=1.0 - rho / h * (1.0 + sh),
        ey_lo=-rho / (h * h),
        ey2_lo=1.0 - rho / h,
        ey3_lo=-rho,
    )


def psi_split(n: int, t: float, a: float, b: float, c: float, rho: float) -> float:
    """Point where the tail and center regimes meet.

    Returns b^2 / (2(b-c)) * log(sqrt(n) t^3 / (rho a)). Diagnostic only:
    C(t) covers both regimes, so the bound pipeline never needs n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not t > 1:
        raise ValueError("t must be > 1")
    if not a > 0:
        raise ValueError("a must be > 0")
    if not c >= 1:
        raise ValueError("c must be >= 1")
    if not b > c:
        raise ValueError("b must exceed c")
    if not rho >= 1:
        raise ValueError("rho must be >= 1")
    arg = math.sqrt(n) * t**3 / (rho * a)
    if not arg > 1:
        raise ValueError(f"sqrt(n) t^3 / (rho a) must exceed 1 (got {arg!r})")
    return b * b / (2.0 * (b - c)) * math.log(arg)
