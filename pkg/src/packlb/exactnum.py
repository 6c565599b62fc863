"""Exact rational and first-order infinitesimal arithmetic.

Rationals are plain ``fractions.Fraction`` (exact, always canonical).
Sizes that carry symbolic perturbations like ``1/420 - eps`` or
``1/4 + 100*dlt`` are :class:`PerturbedSize` values: a rational base plus
rational coefficients for two independent positive infinitesimals ``eps``
and ``dlt``.  The two symbols are order-incomparable by design; a
comparison that would need to know the relative magnitude of ``eps`` and
``dlt`` yields :data:`Ordering.AMBIGUOUS` instead of guessing.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction

Rat = Fraction

__all__ = [
    "Rat",
    "Ordering",
    "AmbiguousOrderError",
    "PerturbedSize",
    "ZERO",
    "ONE",
    "rat",
    "rat_str",
    "rat_decimal",
    "floor_div",
    "lex_compare",
    "lex_le",
    "lex_lt",
    "is_positive",
    "max_multiple_le",
]


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1
    AMBIGUOUS = None


class AmbiguousOrderError(ValueError):
    """A comparison depended on the relative order of eps and dlt."""


def rat(value) -> Fraction:
    """Exact rational from int, Fraction or a string like ``-3/420``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"not an exact rational: {value!r}")


def rat_str(q: Fraction) -> str:
    return str(q)


def rat_decimal(q: Fraction, digits: int = 7) -> str:
    """Round-to-nearest decimal rendering, display only."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = q * 10**digits
    n = scaled.numerator // scaled.denominator
    if 2 * (scaled - n) >= 1:
        n += 1
    whole, frac = divmod(n, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def floor_div(a: Fraction, b: Fraction) -> int:
    """``floor(a / b)`` for exact rationals, b > 0."""
    if b <= 0:
        raise ZeroDivisionError("floor_div requires a positive divisor")
    return (a.numerator * b.denominator) // (b.numerator * a.denominator)


_TERM = re.compile(
    r"([+-]?)\s*(?:\(\s*(-?\d+(?:/\d+)?)\s*\)|(-?\d+(?:/\d+)?))\s*(?:\*?\s*(e|eps|d|dlt))?",
)


@dataclass(frozen=True)
class PerturbedSize:
    """base + eps_coeff * eps + dlt_coeff * dlt, eps and dlt infinitesimal."""

    base: Fraction
    eps: Fraction = Fraction(0)
    dlt: Fraction = Fraction(0)

    # -- construction -------------------------------------------------

    @staticmethod
    def of(base, eps=0, dlt=0) -> "PerturbedSize":
        return PerturbedSize(rat(base), rat(eps), rat(dlt))

    @staticmethod
    def parse(text: str) -> "PerturbedSize":
        """Parse ``"p/q"``, ``"p/q + (a/b)e"``, ``"p/q - (c/d)d"`` forms."""
        base = Fraction(0)
        eps = Fraction(0)
        dlt = Fraction(0)
        rest = text.strip()
        if not rest:
            raise ValueError("empty perturbed size")
        pos = 0
        seen = False
        while pos < len(rest):
            m = _TERM.match(rest, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"cannot parse perturbed size: {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            coeff = Fraction(m.group(2) or m.group(3))
            sym = m.group(4)
            if sym is None:
                base += sign * coeff
            elif sym in ("e", "eps"):
                eps += sign * coeff
            else:
                dlt += sign * coeff
            seen = True
            pos = m.end()
            while pos < len(rest) and rest[pos].isspace():
                pos += 1
        if not seen:
            raise ValueError(f"cannot parse perturbed size: {text!r}")
        return PerturbedSize(base, eps, dlt)

    # -- serialization ------------------------------------------------

    def __str__(self) -> str:
        parts = [str(self.base)]
        if self.eps:
            parts.append(f"+ ({self.eps})e" if self.eps > 0 else f"- ({-self.eps})e")
        if self.dlt:
            parts.append(f"+ ({self.dlt})d" if self.dlt > 0 else f"- ({-self.dlt})d")
        return " ".join(parts)

    # -- arithmetic (componentwise, exact) -----------------------------

    def __add__(self, other: "PerturbedSize") -> "PerturbedSize":
        return PerturbedSize(self.base + other.base, self.eps + other.eps, self.dlt + other.dlt)

    def __sub__(self, other: "PerturbedSize") -> "PerturbedSize":
        return PerturbedSize(self.base - other.base, self.eps - other.eps, self.dlt - other.dlt)

    def __neg__(self) -> "PerturbedSize":
        return PerturbedSize(-self.base, -self.eps, -self.dlt)

    def scale(self, k) -> "PerturbedSize":
        k = rat(k)
        return PerturbedSize(self.base * k, self.eps * k, self.dlt * k)

    def __mul__(self, k) -> "PerturbedSize":
        return self.scale(k)

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return not (self.base or self.eps or self.dlt)


ZERO = PerturbedSize.of(0)
ONE = PerturbedSize.of(1)


def lex_compare(a: PerturbedSize, b: PerturbedSize) -> Ordering:
    """Compare for all sufficiently small positive eps, dlt.

    The base decides first.  On a tie the infinitesimal difference decides:
    if the eps and dlt coefficient differences are both nonzero with
    opposite signs the order depends on eps vs dlt and the result is
    AMBIGUOUS; agreeing signs (or a single nonzero difference) decide.
    """
    if a.base != b.base:
        return Ordering.LESS if a.base < b.base else Ordering.GREATER
    de = a.eps - b.eps
    dd = a.dlt - b.dlt
    if de == 0 and dd == 0:
        return Ordering.EQUAL
    if de == 0:
        return Ordering.LESS if dd < 0 else Ordering.GREATER
    if dd == 0:
        return Ordering.LESS if de < 0 else Ordering.GREATER
    if (de < 0) == (dd < 0):
        return Ordering.LESS if de < 0 else Ordering.GREATER
    return Ordering.AMBIGUOUS


def _strict(ordering: Ordering, a, b) -> Ordering:
    if ordering is Ordering.AMBIGUOUS:
        raise AmbiguousOrderError(f"ambiguous comparison: {a} vs {b}")
    return ordering


def lex_le(a: PerturbedSize, b: PerturbedSize) -> bool:
    return _strict(lex_compare(a, b), a, b) in (Ordering.LESS, Ordering.EQUAL)


def lex_lt(a: PerturbedSize, b: PerturbedSize) -> bool:
    return _strict(lex_compare(a, b), a, b) is Ordering.LESS


def is_positive(a: PerturbedSize) -> bool:
    return _strict(lex_compare(a, ZERO), a, ZERO) is Ordering.GREATER


def max_multiple_le(size: PerturbedSize, limit: PerturbedSize = ONE) -> int:
    """Largest m >= 0 with m * size <= limit (lexicographically).

    This is the exact per-axis capacity for items of extent ``size``:
    e.g. 420 items of side 1/420 - eps fit in a unit edge, but only 419
    anchors of the (1+eps)/420 grid do.
    """
    if not is_positive(size):
        raise ValueError("size must be strictly positive")
    if size.base == 0:
        raise ValueError("size must have a positive rational part")
    m = max(floor_div(limit.base, size.base), 0)
    while m > 0 and not lex_le(size.scale(m), limit):
        m -= 1
    # the base floor can be one short when the infinitesimal part allows one more
    while lex_le(size.scale(m + 1), limit):
        m += 1
    return m
