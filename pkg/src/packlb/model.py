"""Instances, patterns, weight systems and certificates.

File formats are JSON with every number an exact string ("p/q" for
rationals, "p/q + (a/b)e + (c/d)d" for perturbed sizes); nothing is ever
parsed through floating point.  Loading validates the structural
invariants and names the offending field on failure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .exactnum import (
    ONE,
    Ordering,
    PerturbedSize,
    Rat,
    is_positive,
    lex_compare,
    rat,
)

__all__ = [
    "SchemaError",
    "ItemType",
    "Instance",
    "Pattern",
    "DualCertificate",
    "PrimalSolution",
    "OptScheme",
    "load_instance",
    "load_certificate",
    "load_primal_solution",
    "load_opt_scheme",
    "pattern_weight",
    "coverage_check",
]


class SchemaError(ValueError):
    """An input file violates the documented schema or an invariant."""


@dataclass(frozen=True)
class ItemType:
    id: int
    width: PerturbedSize
    height: PerturbedSize

    @property
    def is_square(self) -> bool:
        return self.width == self.height


@dataclass(frozen=True)
class Instance:
    name: str
    dimension: int
    geometry: str  # "hypercube" | "rectangle2d"
    types: tuple[ItemType, ...]
    alphas: tuple[Fraction, ...]
    opt_ratios: tuple[Fraction, ...]
    grid_resolution: int | None = None  # anchor grid G when declared

    @property
    def k(self) -> int:
        return len(self.types)

    def validate(self) -> None:
        if self.dimension < 1:
            raise SchemaError("dimension must be >= 1")
        if self.geometry not in ("hypercube", "rectangle2d"):
            raise SchemaError(f"unknown geometry {self.geometry!r}")
        if not (len(self.types) == len(self.alphas) == len(self.opt_ratios)):
            raise SchemaError("types, alphas and optRatios must have equal length")
        for t in self.types:
            for axis, s in (("width", t.width), ("height", t.height)):
                if not is_positive(s):
                    raise SchemaError(f"type {t.id}: {axis} not strictly positive")
                if lex_compare(s, ONE) is Ordering.GREATER:
                    raise SchemaError(f"type {t.id}: {axis} exceeds the unit bin")
        for j in range(1, len(self.opt_ratios)):
            if self.opt_ratios[j] < self.opt_ratios[j - 1]:
                raise SchemaError(
                    f"optRatios not nondecreasing at index {j}: "
                    f"{self.opt_ratios[j - 1]} > {self.opt_ratios[j]}"
                )
        if self.geometry == "hypercube":
            for t in self.types:
                if t.width != t.height:
                    raise SchemaError(f"type {t.id}: hypercube type must be square")
            for j in range(1, len(self.types)):
                if lex_compare(self.types[j - 1].width, self.types[j].width) is Ordering.GREATER:
                    raise SchemaError(f"hypercube sizes must be nondecreasing (type {j})")


@dataclass(frozen=True)
class Pattern:
    """One bin's content: a count per item type."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise SchemaError("pattern counts must be nonnegative")
        if not any(self.counts):
            raise SchemaError("pattern must contain at least one item")

    @property
    def class_index(self) -> int:
        """1-based index of the smallest used type (membership in T_j)."""
        for j, c in enumerate(self.counts):
            if c:
                return j + 1
        raise AssertionError("unreachable: empty pattern")

    @property
    def total_items(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class DualCertificate:
    lambdas: tuple[Fraction, ...]
    mus: tuple[Fraction, ...]
    dominance: tuple[tuple[int, int, int, int], ...] = ()  # (dominator, dominated, m1, m2)
    aux: dict = field(default_factory=dict, compare=False)

    def validate(self) -> None:
        if len(self.lambdas) != len(self.mus):
            raise SchemaError("lambda and mu must have equal length")
        for j, lam in enumerate(self.lambdas):
            if lam < 0:
                raise SchemaError(f"lambda[{j + 1}] negative")
        for j, mu in enumerate(self.mus):
            if mu > 0:
                raise SchemaError(f"mu[{j + 1}] positive")

    def capacity(self, j: int) -> Fraction:
        """Knapsack capacity for class j: -sum_{i>=j} mu_i (1-based j)."""
        return -sum(self.mus[j - 1 :], Fraction(0))


@dataclass(frozen=True)
class PrimalSolution:
    entries: tuple[tuple[Pattern, Fraction], ...]
    ratio: Fraction  # objective value R

    def validate(self) -> None:
        for p, x in self.entries:
            if x < 0:
                raise SchemaError(f"negative primal value for pattern {p.counts}")


@dataclass(frozen=True)
class OptScheme:
    """Per prefix j, bins (pattern, binCount) realizing opt_ratios[j]."""

    prefixes: tuple[tuple[tuple[Pattern, Fraction], ...], ...]


# ---------------------------------------------------------------------------
# loading


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise SchemaError(f"{path}: missing field {key!r}")
    return doc[key]


def load_instance(path) -> Instance:
    doc = _load_json(path)
    try:
        types = []
        for i, t in enumerate(_require(doc, "types", path)):
            if "side" in t:
                side = PerturbedSize.parse(t["side"])
                types.append(ItemType(i + 1, side, side))
            else:
                types.append(
                    ItemType(i + 1, PerturbedSize.parse(t["width"]), PerturbedSize.parse(t["height"]))
                )
        inst = Instance(
            name=doc.get("name", Path(str(path)).stem),
            dimension=int(_require(doc, "dimension", path)),
            geometry=str(_require(doc, "geometry", path)),
            types=tuple(types),
            alphas=tuple(rat(a) for a in _require(doc, "alphas", path)),
            opt_ratios=tuple(rat(r) for r in _require(doc, "optRatios", path)),
            grid_resolution=doc.get("gridResolution"),
        )
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    inst.validate()
    return inst


def load_certificate(path) -> DualCertificate:
    doc = _load_json(path)
    try:
        cert = DualCertificate(
            lambdas=tuple(rat(v) for v in _require(doc, "lambda", path)),
            mus=tuple(rat(v) for v in _require(doc, "mu", path)),
            dominance=tuple(
                (int(r["dominator"]), int(r["dominated"]), int(r.get("m1", 1)), int(r.get("m2", 1)))
                for r in doc.get("dominance", [])
            ),
            aux={k: v for k, v in doc.items() if k not in ("lambda", "mu", "dominance")},
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    cert.validate()
    return cert


def _parse_pattern(raw, k: int) -> Pattern:
    counts = [0] * k
    if isinstance(raw, dict):
        for key, c in raw.items():
            idx = int(key)
            if not 1 <= idx <= k:
                raise SchemaError(f"pattern type index {idx} out of range")
            counts[idx - 1] = int(c)
    else:
        if len(raw) != k:
            raise SchemaError(f"pattern vector has length {len(raw)}, expected {k}")
        counts = [int(c) for c in raw]
    return Pattern(tuple(counts))


def load_primal_solution(path, k: int) -> PrimalSolution:
    doc = _load_json(path)
    entries = tuple(
        (_parse_pattern(e["pattern"], k), rat(e["x"])) for e in _require(doc, "entries", path)
    )
    sol = PrimalSolution(entries=entries, ratio=rat(_require(doc, "ratio", path)))
    sol.validate()
    return sol


def load_opt_scheme(path, k: int) -> OptScheme:
    doc = _load_json(path)
    prefixes = []
    for j, rows in enumerate(_require(doc, "prefixes", path)):
        prefixes.append(
            tuple((_parse_pattern(r["pattern"], k), rat(r["bins"])) for r in rows)
        )
    return OptScheme(prefixes=tuple(prefixes))


# ---------------------------------------------------------------------------
# weights and coverage


def pattern_weight(pattern: Pattern, lambdas: Sequence[Fraction]) -> Fraction:
    if len(pattern.counts) != len(lambdas):
        raise ValueError(
            f"pattern has {len(pattern.counts)} types, weights have {len(lambdas)}"
        )
    return sum((c * lam for c, lam in zip(pattern.counts, lambdas)), Fraction(0))


@dataclass(frozen=True)
class CoverageRow:
    kind: str  # "type" | "prefix"
    index: object  # 1-based type/prefix index, or (prefix, type) for schemes
    lhs: Fraction
    rhs: Fraction
    holds: bool
    tight: bool


def coverage_check(solution, instance: Instance) -> list[CoverageRow]:
    """Arithmetic coverage report (geometry is not checked here).

    For a PrimalSolution: type rows check sum_p p_j x(p) >= alpha_j and
    prefix rows check sum_{i<=j} sum_{p in T_i} x(p) <= opt_ratios[j] * R.
    For an OptScheme: type rows check, per prefix j, that the scheme's bins
    cover alpha_i for every i <= j, and prefix rows that the bin counts sum
    to opt_ratios[j].
    """
    rows: list[CoverageRow] = []
    k = instance.k
    if isinstance(solution, PrimalSolution):
        for j in range(1, k + 1):
            lhs = sum((p.counts[j - 1] * x for p, x in solution.entries), Fraction(0))
            rhs = instance.alphas[j - 1]
            rows.append(CoverageRow("type", j, lhs, rhs, lhs >= rhs, lhs == rhs))
        for j in range(1, k + 1):
            lhs = sum(
                (x for p, x in solution.entries if p.class_index <= j), Fraction(0)
            )
            rhs = instance.opt_ratios[j - 1] * solution.ratio
            rows.append(CoverageRow("prefix", j, lhs, rhs, lhs <= rhs, lhs == rhs))
    elif isinstance(solution, OptScheme):
        for j, prefix in enumerate(solution.prefixes, start=1):
            bins = sum((b for _, b in prefix), Fraction(0))
            rhs = instance.opt_ratios[j - 1]
            rows.append(CoverageRow("prefix", j, bins, rhs, bins == rhs, bins == rhs))
            for i in range(1, j + 1):
                lhs = sum((p.counts[i - 1] * b for p, b in prefix), Fraction(0))
                rhs_i = instance.alphas[i - 1]
                rows.append(
                    CoverageRow("type", (j, i), lhs, rhs_i, lhs >= rhs_i, lhs == rhs_i)
                )
    else:
        raise TypeError(f"unsupported solution type {type(solution)!r}")
    return rows


# ---------------------------------------------------------------------------
# serialization back to the file format


def instance_to_doc(inst: Instance) -> dict:
    types = []
    for t in inst.types:
        if inst.geometry == "hypercube":
            types.append({"side": str(t.width)})
        else:
            types.append({"width": str(t.width), "height": str(t.height)})
    doc = {
        "name": inst.name,
        "dimension": inst.dimension,
        "geometry": inst.geometry,
        "types": types,
        "alphas": [str(a) for a in inst.alphas],
        "optRatios": [str(r) for r in inst.opt_ratios],
    }
    if inst.grid_resolution is not None:
        doc["gridResolution"] = inst.grid_resolution
    return doc
