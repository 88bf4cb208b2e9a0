"""Independent checks of C(t) on exactly computable laws.

For a discrete X the normalized sum S_n = (X_1 + ... + X_n)/sqrt(n) has a
finite support, so F_n is a step function and every tail probability can be
summed exactly from the convolution table.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
from scipy import special

from .ranges import T_MIN

MOMENT_TOL = 1e-12
DEFAULT_MAX_STATES = 2_000_000


# ---------------------------------------------------------------------------
# normal tail
# ---------------------------------------------------------------------------

def normal_cdf_complement(t, log: bool = False):
    """1 - Phi(t), evaluated through erfc so there is no 1 - (near 1) cancellation.

    With ``log=True`` the natural log of the tail is returned instead. Use it
    beyond t ~ 38.4, where the tail itself underflows binary64.
    """
    x = -np.asarray(t, dtype=np.float64)
    out = special.log_ndtr(x) if log else special.ndtr(x)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# discrete laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-atom law with E X = 0, E X^2 = 1 (checked to 1e-12)."""

    values: tuple[float, ...]
    probs: tuple[float, ...]
    name: str = "custom"

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if len(values) == 0 or len(values) != len(probs):
            raise ValueError("values and probs must be non-empty and of equal length")
        if len(set(values)) != len(values):
            raise ValueError("atom values must be distinct")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("atom values must be finite")
        if not all(p > 0 and math.isfinite(p) for p in probs):
            raise ValueError("atom probabilities must be positive")
        total = math.fsum(probs)
        mean = math.fsum(p * v for v, p in zip(values, probs))
        second = math.fsum(p * v * v for v, p in zip(values, probs))
        if abs(total - 1.0) > MOMENT_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if abs(mean) > MOMENT_TOL:
            raise ValueError(f"E X = {mean!r}, expected 0")
        if abs(second - 1.0) > MOMENT_TOL:
            raise ValueError(f"E X^2 = {second!r}, expected 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))

    @property
    def rho(self) -> float:
        # E|X|^3 >= (E X^2)^{3/2} = 1; anything below is rounding
        return max(1.0, math.fsum(p * abs(v) ** 3 for v, p in self.atoms))

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]], name: str = "custom"):
        atoms = list(atoms)
        return cls(tuple(v for v, _ in atoms), tuple(p for _, p in atoms), name)

    @classmethod
    def rademacher(cls):
        return cls((-1.0, 1.0), (0.5, 0.5), "rademacher")

    @classmethod
    def two_point(cls, p: float):
        """Atom sqrt(q/p) with probability p and -sqrt(p/q) with q = 1 - p."""
        p = float(p)
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        q = 1.0 - p
        if min(p, q) < 1e-9:
            raise ValueError(f"p={p!r} is too close to 0 or 1 for a well-conditioned law")
        return cls((-math.sqrt(p / q), math.sqrt(q / p)), (q, p), f"two-point(p={p:.6g})")

    @classmethod
    def two_point_with_rho(cls, rho: float):
        """Two-point law whose rare atom is positive and whose E|X|^3 equals rho.

        With u = sqrt(pq), rho = (1 - 2u^2)/u, so u is the positive root of
        2u^2 + rho*u - 1 = 0.
        """
        rho = float(rho)
        if not rho >= 1.0:
            raise ValueError("rho must be >= 1")
        u = (math.sqrt(rho * rho + 8.0) - rho) / 4.0
        p = 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - 4.0 * u * u)))
        dist = cls.two_point(p)
        return cls(dist.values, dist.probs, f"two-point(rho={rho:.6g})")

    @classmethod
    def three_point(cls, a: float, c: float):
        """Atoms -a, 0, c with the unique probabilities giving mean 0, variance 1."""
        a, c = float(a), float(c)
        if not (a > 0 and c > 0 and a * c > 1.0):
            raise ValueError("need a > 0, c > 0 and a*c > 1")
        pa = 1.0 / (a * (a + c))
        pc = 1.0 / (c * (a + c))
        p0 = 1.0 - 1.0 / (a * c)
        if min(pa, pc, p0) < 1e-12:
            raise ValueError("ill-conditioned three-point law")
        return cls((-a, 0.0, c), (pa, p0, pc), f"three-point(a={a:.6g},c={c:.6g})")

    @classmethod
    def standardized(cls, values: Sequence[float], weights: Sequence[float], name: str = "standardized"):
        """Rescale arbitrary atoms/weights to mean 0, variance 1."""
        v = np.asarray(values, dtype=np.float64)
        w = np.asarray(weights, dtype=np.float64)
        w = w / w.sum()
        mean = float(np.dot(w, v))
        sd = math.sqrt(float(np.dot(w, (v - mean) ** 2)))
        if sd == 0:
            raise ValueError("degenerate law")
        return cls(tuple((v - mean) / sd), tuple(w), name)


_ATOM_RE = re.compile(r"\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)")


def parse_atoms(spec: str) -> list[tuple[float, float]]:
    """Parse ``"(-1,0.5),(1,0.5)"`` into [(value, prob), ...]."""
    atoms = [(float(v), float(p)) for v, p in _ATOM_RE.findall(spec)]
    leftover = _ATOM_RE.sub("", spec).replace(",", "").strip()
    if not atoms or leftover:
        raise ValueError(f"cannot parse atom spec {spec!r}")
    return atoms


# ---------------------------------------------------------------------------
# exact convolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConvolvedLaw:
    """Law of S_n on its sorted support, with head and tail sums kept separately."""

    support: np.ndarray
    probs: np.ndarray
    n: int
    _head: np.ndarray = field(repr=False)  # P(S <= support[i])
    _tail: np.ndarray = field(repr=False)  # P(S >= support[i])

    @classmethod
    def from_table(cls, support, probs, n):
        support = np.asarray(support, dtype=np.float64)
        probs = np.asarray(probs, dtype=np.float64)
        head = np.cumsum(probs)
        tail = np.cumsum(probs[::-1])[::-1]
        for a in (support, probs, head, tail):
            a.setflags(write=False)
        return cls(support, probs, n, head, tail)

    def reflected(self) -> "ConvolvedLaw":
        return ConvolvedLaw.from_table(-self.support[::-1], self.probs[::-1], self.n)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.probs)

    def cdf(self, x) -> float:
        i = np.searchsorted(self.support, x, side="right")
        return float(self._head[i - 1]) if i > 0 else 0.0

    def cdf_left(self, x) -> float:
        i = np.searchsorted(self.support, x, side="left")
        return float(self._head[i - 1]) if i > 0 else 0.0

    def sf(self, x):
        """P(S > x), summed from the upper end (no cancellation)."""
        i = np.searchsorted(self.support, x, side="right")
        tail = np.append(self._tail, 0.0)
        return tail[i]

    def sf_left(self, x):
        """P(S >= x)."""
        i = np.searchsorted(self.support, x, side="left")
        tail = np.append(self._tail, 0.0)
        return tail[i]


@functools.lru_cache(maxsize=256)
def convolve(dist: DiscreteDistribution, n: int, max_states: int = DEFAULT_MAX_STATES) -> ConvolvedLaw:
    """Law of (X_1 + ... + X_n)/sqrt(n) by n-1 sparse convolutions.

    States are count vectors (how many draws hit each atom), so equal partial
    sums are merged exactly rather than by floating-point comparison. Only the
    final support values are formed as floats; values that coincide within
    1e-12 are merged there.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    k = len(dist.values)
    radix = n + 1
    if k * math.log2(radix) > 62:
        raise ValueError("support too large to index exactly")
    n_states = math.comb(n + k - 1, k - 1)
    if n_states > max_states:
        raise ValueError(f"convolution would need {n_states} states (cap {max_states})")

    atom_p = np.asarray(dist.probs)
    unit = radix ** np.arange(k, dtype=np.int64)
    keys = unit.copy()
    probs = atom_p.copy()
    for _ in range(n - 1):
        cand_keys = (keys[:, None] + unit[None, :]).ravel()
        cand_probs = (probs[:, None] * atom_p[None, :]).ravel()
        keys, inverse = np.unique(cand_keys, return_inverse=True)
        probs = np.bincount(inverse, weights=cand_probs, minlength=keys.size)

    counts = (keys[:, None] // unit[None, :]) % radix
    sums = counts @ np.asarray(dist.values)
    order = np.argsort(sums, kind="stable")
    sums, probs = sums[order], probs[order]
    scale = np.maximum(1.0, np.abs(sums))
    new_group = np.empty(sums.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(sums) > 1e-12 * scale[1:]
    group = np.cumsum(new_group) - 1
    merged_p = np.bincount(group, weights=probs)
    merged_v = sums[new_group]
    return ConvolvedLaw.from_table(merged_v / math.sqrt(n), merged_p, n)


def exact_convolution_cdf(dist: DiscreteDistribution, n: int, x: float) -> float:
    """F_n(x) = P(S_n <= x) (right-continuous)."""
    return convolve(dist, n).cdf(x)


def monte_carlo_cdf(dist: DiscreteDistribution, n: int, x: float, size: int = 100_000,
                    seed: int | None = None) -> tuple[float, float]:
    """Sampled estimate of F_n(x) and its standard error; a smoke test only."""
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, dist.probs, size=size)
    s = counts @ np.asarray(dist.values) / math.sqrt(n)
    est = float(np.mean(s <= x))
    return est, math.sqrt(max(est * (1.0 - est), 1.0 / size) / size)


# ---------------------------------------------------------------------------
# bound verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    dist: str
    n: int
    tail: str
    t_grid: list[float]
    ratios: list[float]
    worst_x: list[float]
    max_ratio: float
    violations: list[float]

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "dist": self.dist,
            "n": self.n,
            "tail": self.tail,
            "t_grid": self.t_grid,
            "ratios": self.ratios,
            "worst_x": self.worst_x,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
        }


def _sup_discrepancy(law: ConvolvedLaw, t: float, x_max: float, n: int, rho: float):
    """max over x in [t, x_max] of sqrt(n) x^3 |F_n(x) - Phi(x)| / rho.

    For x > sqrt(3) the product x^3 |F - Phi| is monotone between consecutive
    atoms of F_n, so the sup over each gap sits at a one-sided limit at one of
    its ends. Checking t, x_max and both sides of every atom in between is
    therefore exhaustive on [t, x_max].
    """
    lo = np.searchsorted(law.support, t, side="left")
    hi = np.searchsorted(law.support, x_max, side="right")
    atoms = law.support[lo:hi]
    xs = np.concatenate(([t], atoms, atoms, [x_max]))
    # upper tails of F_n at x (right limit) and just below x (left limit)
    tails = np.concatenate((
        [law.sf(t)], law.sf_left(atoms), law.sf(atoms), [law.sf(x_max)]
    ))
    # an atom at exactly t contributes only its right limit; drop its left limit
    if atoms.size and atoms[0] == t:
        tails[1] = tails[1 + atoms.size]
    normal = normal_cdf_complement(xs)
    vals = math.sqrt(n) * xs**3 * np.abs(tails - normal) / rho
    i = int(np.argmax(vals))
    return float(vals[i]), float(xs[i])


def verify_bound(
    dist: DiscreteDistribution,
    n: int,
    t_grid: Iterable[float],
    c_of_t: Callable[[float], float] | None = None,
    x_max_factor: float = 2.0,
    tail: Literal["upper", "lower"] = "upper",
) -> VerificationReport:
    """Check sup_{x >= t} sqrt(n) x^3 |F_n(x) - Phi(x)| / rho <= C(t) on a t grid.

    ``tail="lower"`` checks the mirror statement for F_n(-x) and Phi(-x).
    The x range is cut at ``x_max_factor * t``.
    """
    if c_of_t is None:
        from .optimizer import bound_function

        c_of_t = bound_function()
    if tail not in ("upper", "lower"):
        raise ValueError("tail must be 'upper' or 'lower'")
    t_grid = [float(t) for t in t_grid]
    for t in t_grid:
        if t < T_MIN:
            raise ValueError(f"t must be >= {T_MIN} (got {t!r})")
    law = convolve(dist, n)
    if tail == "lower":
        law = law.reflected()
    rho = dist.rho
    ratios, worst = [], []
    for t in t_grid:
        c = c_of_t(t)
        sup, x = _sup_discrepancy(law, t, x_max_factor * t, n, rho)
        ratios.append(sup / c)
        worst.append(x)
    violations = [t for t, r in zip(t_grid, ratios) if r > 1.0]
    return VerificationReport(
        dist=dist.name,
        n=n,
        tail=tail,
        t_grid=t_grid,
        ratios=ratios,
        worst_x=worst,
        max_ratio=max(ratios, default=0.0),
        violations=violations,
    )


# ---------------------------------------------------------------------------
# confidence interval for the sample mean
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CIBound:
    n: int
    eps: float
    rho: float
    t: float
    c_value: float
    normal_term: float
    correction_term: float

    @property
    def bound(self) -> float:
        return 2.0 * (self.normal_term + self.correction_term)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "rho": self.rho,
            "t": self.t,
            "c_value": self.c_value,
            "normal_term": self.normal_term,
            "correction_term": self.correction_term,
            "bound": self.bound,
        }


def ci_terms(n: int, eps: float, rho: float = 1.0,
             c_of_t: Callable[[float], float] | None = None) -> CIBound:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be > 0")
    if not rho >= 1:
        raise ValueError("rho must be >= 1")
    t = math.sqrt(n) * eps
    if t < T_MIN:
        raise ValueError(
            f"sqrt(n)*eps = {t:.6g} is outside the supported domain: the bound "
            f"needs sqrt(n)*eps >= 1, and C(t) is only computed for t >= {T_MIN}"
        )
    if c_of_t is None:
        from .optimizer import bound_function

        c_of_t = bound_function()
    c = c_of_t(t)
    return CIBound(
        n=n,
        eps=eps,
        rho=rho,
        t=t,
        c_value=c,
        normal_term=normal_cdf_complement(t),
        correction_term=rho * c / (n * n * eps**3),
    )


def ci_bound(n: int, eps: float, rho: float = 1.0,
             c_of_t: Callable[[float], float] | None = None) -> float:
    """Upper bound on P(|sample mean - theta| > eps)."""
    return ci_terms(n, eps, rho, c_of_t).bound
