"""Parametric lower-bound formulas for Harmonic-type algorithms.

Everything rational is exact; the only irrational quantities (d-th roots
and the two square-root optima of the B1/B2 classes) are handled as
certified dyadic intervals of configurable width.  Interval endpoints are
Fractions, so containment statements are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .exactnum import Rat, rat
from .packing import harmonic_anchor_count

__all__ = [
    "HarmonicParams",
    "Interval",
    "ineq1",
    "ineq2",
    "ineq3",
    "closed_form_bound",
    "equalized_red_fraction",
    "y_recursion",
    "harmonic_worst_case",
    "b1_bounds",
    "b1_optimize",
    "b2_bounds",
    "b2_optimize",
    "harmonic_instance_cost",
    "nth_root_interval",
    "sqrt_interval",
]

DEFAULT_TOL = Fraction(1, 10**12)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    @staticmethod
    def point(x) -> "Interval":
        x = rat(x)
        return Interval(x, x)

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        other = rat(other)
        return Interval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Interval) else -rat(other))

    def __rsub__(self, other):
        return (-self) + rat(other)

    def scale(self, c) -> "Interval":
        c = rat(c)
        if c >= 0:
            return Interval(self.lo * c, self.hi * c)
        return Interval(self.hi * c, self.lo * c)

    def __mul__(self, other):
        if isinstance(other, Interval):
            prods = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
            return Interval(min(prods), max(prods))
        return self.scale(other)

    __rmul__ = __mul__


def nth_root_interval(x: Fraction, n: int, tol: Fraction = DEFAULT_TOL) -> Interval:
    """Certified interval around x**(1/n) for x >= 0, width <= tol."""
    x = rat(x)
    if x < 0:
        raise ValueError("nth_root_interval requires x >= 0")
    if x == 0:
        return Interval(Fraction(0), Fraction(0))
    lo, hi = Fraction(0), max(Fraction(1), x)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid**n <= x:
            lo = mid
        else:
            hi = mid
    return Interval(lo, hi)


def sqrt_interval(x, tol: Fraction = Fraction(1, 10**12)) -> Interval:
    return nth_root_interval(rat(x), 2, tol)


@dataclass(frozen=True)
class HarmonicParams:
    d: int
    h: int
    y: tuple[Fraction, ...]  # y_1 .. y_h
    m: tuple[Fraction, ...]  # m_1 .. m_h, each >= 1
    sand_threshold: Fraction | None = None  # optional lambda of I_lambda

    Y0 = Fraction(1, 3)
    Y_TOP = Fraction(1, 2)

    def validate(self) -> None:
        if self.d < 1 or self.h < 1:
            raise ValueError("d and h must be >= 1")
        if len(self.y) != self.h or len(self.m) != self.h:
            raise ValueError("y and m must have length h")
        prev = self.Y0
        for j, yj in enumerate(self.y, start=1):
            if not prev < yj < self.Y_TOP:
                raise ValueError(f"threshold chain violated at y_{j} = {yj}")
            prev = yj
        for j, mj in enumerate(self.m, start=1):
            if mj < 1:
                raise ValueError(f"m_{j} = {mj} < 1")

    def y_at(self, idx: int) -> Fraction:
        """y_idx with the boundary conventions y_0 = 1/3, y_{h+1} = 1/2."""
        if idx == 0:
            return self.Y0
        if idx == self.h + 1:
            return self.Y_TOP
        return self.y[idx - 1]


def _dom(d: int, m, y) -> None:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if m is not None and rat(m) < 1:
        raise ValueError("red fraction denominator m must be >= 1")
    if y is not None and not 0 < rat(y) < Fraction(1, 2):
        raise ValueError("threshold must lie in (0, 1/2)")


def ineq1(d: int, m_j, y_hj) -> Fraction:
    """Instances 1..h: 2 + (1-1/m)(1-1/2^d) - 1/2^d - (2^d-1) y^d."""
    _dom(d, m_j, y_hj)
    m_j, y_hj = rat(m_j), rat(y_hj)
    two_d = Fraction(2**d)
    return (
        2
        + (1 - 1 / m_j) * (1 - 1 / two_d)
        - 1 / two_d
        - (two_d - 1) * y_hj**d
    )


def ineq2(d: int, m_j, y_hj, y_next) -> Fraction:
    """Instances h+1..2h: 2 + 1/m + (1-1/m)(1-1/2^d) - (1-y')^d - (2^d-1) y^d."""
    _dom(d, m_j, y_hj)
    m_j, y_hj, y_next = rat(m_j), rat(y_hj), rat(y_next)
    if not y_hj < y_next:
        raise ValueError("need y_{h-j} < y_{h-j+1}")
    two_d = Fraction(2**d)
    return (
        2
        + 1 / m_j
        + (1 - 1 / m_j) * (1 - 1 / two_d)
        - (1 - y_next) ** d
        - (two_d - 1) * y_hj**d
    )


def ineq3(d: int, y_h) -> Fraction:
    """Instance 2h+1: 3 - 1/2^(d-1) - (2^d-1) y_h^d."""
    _dom(d, None, y_h)
    y_h = rat(y_h)
    return 3 - Fraction(1, 2 ** (d - 1)) - (2**d - 1) * y_h**d


def closed_form_bound(d: int) -> Fraction:
    """3 - 2(2^d-1)/3^d - (2^d+1)/4^d."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return 3 - Fraction(2 * (2**d - 1), 3**d) - Fraction(2**d + 1, 4**d)


def equalized_red_fraction(d: int, y_next) -> Fraction:
    """m with 1/m = (1 - y_next)^d - 1/2^d, the value equating (1) and (2)."""
    y_next = rat(y_next)
    inv = (1 - y_next) ** d - Fraction(1, 2**d)
    if inv <= 0:
        raise ValueError("equalization undefined: (1-y)^d <= 1/2^d")
    return 1 / inv


def y_recursion(d: int, R, y_prev, tol: Fraction = DEFAULT_TOL) -> Interval:
    """Next threshold: y_j = 1 - (radicand/(2^d - 1))^(1/d).

    radicand = -2^d R + 2^d y^d - 4^d y^d - 1 + 3*2^d - 1/2^d, y = y_{j-1}.
    Exact for d = 1; a certified interval otherwise.
    """
    R, y_prev = rat(R), rat(y_prev)
    two_d = Fraction(2**d)
    radicand = (
        -two_d * R
        + two_d * y_prev**d
        - Fraction(4**d) * y_prev**d
        - 1
        + 3 * two_d
        - 1 / two_d
    ) / (two_d - 1)
    if radicand <= 0:
        raise ValueError(f"radicand {radicand} <= 0: R out of domain")
    if d == 1:
        v = 1 - radicand
        return Interval(v, v)
    root = nth_root_interval(radicand, d, tol)
    return Interval(1 - root.hi, 1 - root.lo)


def harmonic_worst_case(params: HarmonicParams) -> Fraction:
    """max over j of ineq1, ineq2 plus ineq3, all exact."""
    params.validate()
    vals = []
    for j in range(1, params.h + 1):
        vals.append(ineq1(params.d, params.m[j - 1], params.y_at(params.h - j)))
        vals.append(
            ineq2(
                params.d,
                params.m[j - 1],
                params.y_at(params.h - j),
                params.y_at(params.h - j + 1),
            )
        )
    vals.append(ineq3(params.d, params.y_at(params.h)))
    return max(vals)


# ---------------------------------------------------------------------------
# classes B1 and B2


def b1_bounds(alpha) -> tuple[Fraction, Fraction]:
    """Ratios (213-2a)/(9(12-a)) and (26-9a)/12 of the two B1 inputs."""
    a = rat(alpha)
    if not 0 <= a <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return Fraction(213 - 2 * a, 1) / (9 * (12 - a)), Fraction(26 - 9 * a, 1) / 12


def b2_bounds(alpha) -> tuple[Fraction, Fraction]:
    """Ratios (85+79a)/(9(5-a)) and (26-9a)/12 of the two B2 inputs."""
    a = rat(alpha)
    if not 0 <= a <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return Fraction(85 + 79 * a, 1) / (9 * (5 - a)), Fraction(26 - 9 * a, 1) / 12


@dataclass(frozen=True)
class SurdOptimum:
    """alpha* = (p - sqrt(q)) / r with a certified enclosure and bound."""

    p: int
    q: int
    r: int
    alpha: Interval
    bound: Interval

    def quadratic(self) -> tuple[int, int, int]:
        """Coefficients (a, b, c) of the monic-cleared quadratic it solves."""
        # alpha = (p - sqrt(q))/r  <=>  (r*alpha - p)^2 = q
        return (self.r * self.r, -2 * self.p * self.r, self.p * self.p - self.q)


def _optimize_surd(p: int, q: int, r: int, eval_bound: Callable, tol: Fraction) -> SurdOptimum:
    root = sqrt_interval(Fraction(q), tol * r / 4)
    alpha = Interval((p - root.hi) / r, (p - root.lo) / r)
    lo = min(min(eval_bound(alpha.lo)), min(eval_bound(alpha.hi)))
    hi = max(max(eval_bound(alpha.lo)), max(eval_bound(alpha.hi)))
    return SurdOptimum(p, q, r, alpha, Interval(lo, hi))


def b1_optimize(tol: Fraction = Fraction(1, 10**9)) -> SurdOptimum:
    """Equalize the two B1 ratios: 27a^2 - 394a + 84 = 0, a = (197-sqrt(36541))/27."""
    return _optimize_surd(197, 36541, 27, b1_bounds, tol)


def b2_optimize(tol: Fraction = Fraction(1, 10**9)) -> SurdOptimum:
    """Equalize the two B2 ratios: 27a^2 - 529a + 50 = 0, a = (529-sqrt(274441))/54."""
    return _optimize_surd(529, 274441, 54, b2_bounds, tol)


# ---------------------------------------------------------------------------
# finite-K instance costs (pre-limit forms)


def harmonic_instance_cost(family: str, d: int, K: int, m_j, y, y_next=None) -> Fraction:
    """Bins per N for the finite-K adversarial instance, exactly.

    family "inner": red/blue v-bins + lone u-bins + t-bins; tends to
    ineq1 as K grows.  family "cross" tends to ineq2, family "top" to
    ineq3.  Divisibility preconditions are shared with
    harmonic_anchor_count.
    """
    y = rat(y)
    two_d = Fraction(2**d)
    M = harmonic_anchor_count(family, d, K, y, y_next)
    if family == "inner":
        m_j = rat(m_j)
        t_anchor_side = Fraction(2 * K, 1) / y - 1
        t_bins = Fraction(M) / t_anchor_side**d
        return 1 / m_j + (1 - 1 / m_j) * (1 - 1 / two_d) + (1 - 1 / m_j) + t_bins
    if family == "cross":
        m_j = rat(m_j)
        y_next = rat(y_next)
        side = Fraction(K, 1) / (y * (1 - y_next)) - 1
        t_bins = Fraction(M) / side**d
        return 1 / m_j + (1 - 1 / m_j) * (1 - 1 / two_d) + 1 + t_bins
    if family == "top":
        side = Fraction(2 * K, 1) / y - 1
        t_bins = Fraction(M) / side**d
        return 1 + (1 - 1 / two_d) + t_bins
    raise ValueError(f"unknown family {family!r}")
