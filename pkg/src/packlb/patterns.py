"""Dominance relations, type reduction and heaviest-pattern search.

The dual verification reduces each class T_j to the types not dominated
(directly or transitively) by another type >= j, then maximizes pattern
weight over the reduced types.  Three maximization routes:

* one reduced type: the exact single-type capacity (product of per-axis
  capacities), verdict EXACT;
* grid-aligned square types with equal per-cell weight: the maximum is
  per-cell weight times the maximum coverable cell count, bracketed by a
  witness placement from below and a modular stripe certificate from
  above (verdict PRUNED_EXACT when they meet);
* small rectangle mixes: full enumeration of count vectors, each decided
  by the exhaustive oracle, verdict EXACT.

Anything the oracles cannot settle within budget is reported UNPROVEN,
never silently optimistic.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactnum import Ordering, PerturbedSize, lex_compare
from .model import DualCertificate, Instance, ItemType, Pattern, pattern_weight
from .packing import (
    AnchorGrid,
    BudgetExceeded,
    Feasible,
    Infeasible,
    PlacedItem,
    Placement,
    axis_capacity,
    exhaustive_feasible,
    grid_capacity,
    grid_units,
    single_type_capacity,
    stripe_coverage_bound,
    verify_placement,
)

__all__ = [
    "Verdict",
    "DominanceRule",
    "KnapsackEntry",
    "KnapsackReport",
    "check_dominance",
    "dominance_closure",
    "reduced_type_set",
    "heaviest_pattern",
    "verify_dominant_only",
    "substitute_in_placement",
    "OracleConfig",
]


class Verdict(enum.Enum):
    EXACT = "exact"
    PRUNED_EXACT = "pruned-exact"
    TRUSTED = "trusted"
    UNPROVEN = "unproven"

    def at_least(self, other: "Verdict") -> bool:
        order = [Verdict.UNPROVEN, Verdict.TRUSTED, Verdict.PRUNED_EXACT, Verdict.EXACT]
        return order.index(self) >= order.index(other)


@dataclass(frozen=True)
class DominanceRule:
    dominator: int  # type id i
    dominated: int  # type id j
    m1: int = 1
    m2: int = 1


def check_dominance(
    rule: DominanceRule, types: Sequence[ItemType], lambdas: Sequence[Fraction]
) -> bool:
    """m1*w_i <= w_j, m2*h_i <= h_j and m1*m2*lambda_i >= lambda_j, exactly."""
    ti = types[rule.dominator - 1]
    tj = types[rule.dominated - 1]
    size_ok = (
        lex_compare(ti.width.scale(rule.m1), tj.width) in (Ordering.LESS, Ordering.EQUAL)
        and lex_compare(ti.height.scale(rule.m2), tj.height) in (Ordering.LESS, Ordering.EQUAL)
    )
    weight_ok = rule.m1 * rule.m2 * lambdas[rule.dominator - 1] >= lambdas[rule.dominated - 1]
    return size_ok and weight_ok


def dominance_closure(rules: Sequence[DominanceRule]) -> dict[int, set[int]]:
    """dominated_by[j] = {i : some chain of rules lets i-items replace j}."""
    direct: dict[int, set[int]] = {}
    for r in rules:
        direct.setdefault(r.dominated, set()).add(r.dominator)
    closure: dict[int, set[int]] = {j: set(d) for j, d in direct.items()}
    changed = True
    while changed:
        changed = False
        for j, doms in list(closure.items()):
            for i in list(doms):
                for i2 in closure.get(i, ()):
                    if i2 not in doms:
                        doms.add(i2)
                        changed = True
    return closure


def reduced_type_set(j: int, k: int, rules: Sequence[DominanceRule]) -> set[int]:
    """Types >= j not dominated (transitively) by another type >= j."""
    closure = dominance_closure(rules)
    out = set()
    for t in range(j, k + 1):
        doms = closure.get(t, set())
        if not any(d >= j and d != t for d in doms):
            out.add(t)
    return out


@dataclass
class OracleConfig:
    search_budget: int = 10_000_000
    item_cap: int = 40
    grid: AnchorGrid | None = None
    # coverage certificates: class index -> dict with the stripe parameters
    # and an optional explicit witness placement
    coverage_certs: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)  # class index -> Placement


@dataclass(frozen=True)
class KnapsackEntry:
    class_index: int
    reduced_types: tuple[int, ...]
    pattern: Pattern | None  # witness achieving `weight`, when found
    weight: Fraction  # witnessed maximum
    upper: Fraction  # sound upper bound (== weight for exact verdicts)
    capacity: Fraction
    verdict: Verdict
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.upper <= self.capacity


@dataclass(frozen=True)
class KnapsackReport:
    entries: tuple[KnapsackEntry, ...]

    def entry(self, j: int) -> KnapsackEntry:
        for e in self.entries:
            if e.class_index == j:
                return e
        raise KeyError(j)


def _pattern_of(counts: dict[int, int], k: int) -> Pattern:
    vec = [0] * k
    for tid, c in counts.items():
        vec[tid - 1] = c
    return Pattern(tuple(vec))


def heaviest_pattern(
    j: int,
    instance: Instance,
    lambdas: Sequence[Fraction],
    config: OracleConfig,
    rules: Sequence[DominanceRule],
    use_area_pruning: bool = True,
) -> KnapsackEntry:
    k = instance.k
    reduced = sorted(reduced_type_set(j, k, rules))
    capacity = Fraction(0)  # caller fills in; keep entries self-contained
    if len(reduced) == 1:
        t = instance.types[reduced[0] - 1]
        count = single_type_capacity(t)
        pat = _pattern_of({t.id: count}, k)
        if config.grid is not None:
            span = grid_units(t.width, config.grid)
            if span is not None and grid_capacity(span, config.grid) != count:
                raise AssertionError(
                    f"axis capacity and grid capacity disagree for type {t.id}"
                )
        w = pattern_weight(pat, lambdas)
        return KnapsackEntry(
            j, tuple(reduced), pat, w, w, capacity, Verdict.EXACT,
            note=f"single reduced type {t.id}: capacity {count}",
        )

    grid = config.grid
    if grid is not None:
        spans = [grid_units(instance.types[t - 1].width, grid) for t in reduced]
        if all(s is not None for s in spans):
            return _heaviest_grid_mix(j, instance, lambdas, config, reduced, spans)
    return _heaviest_enumerated(j, instance, lambdas, config, reduced, use_area_pruning)


def _heaviest_grid_mix(j, instance, lambdas, config, reduced, spans) -> KnapsackEntry:
    """Grid-aligned square mix: weight = per-cell weight * cells covered.

    Requires all reduced types to share one per-cell weight; then the
    knapsack equals the maximum coverable cell count, which a stripe
    certificate bounds from above and an explicit witness from below.
    """
    k = instance.k
    width = config.grid.usable
    trivial_upper = None
    per_cell = {lambdas[t - 1] / (s * s) for t, s in zip(reduced, spans)}
    if len(per_cell) != 1:
        return KnapsackEntry(
            j, tuple(reduced), None, Fraction(0),
            max(lambdas[t - 1] / (s * s) for t, s in zip(reduced, spans)) * width * width,
            Fraction(0), Verdict.UNPROVEN,
            note="per-cell weights differ; no coverage argument available",
        )
    cell_weight = per_cell.pop()
    trivial_upper = cell_weight * width * width
    cert = config.coverage_certs.get(j)
    if cert is None:
        upper_cells = width * width
        note_ub = "trivial cell bound"
    else:
        upper_cells = stripe_coverage_bound(
            spans=sorted(spans),
            width=width,
            modulus=int(cert["modulus"]),
            period_values=[int(v) for v in cert["values"]],
        )
        if upper_cells is None:
            return KnapsackEntry(
                j, tuple(reduced), None, Fraction(0), trivial_upper, Fraction(0),
                Verdict.UNPROVEN, note="stripe certificate does not apply to these spans",
            )
        note_ub = (
            f"stripe certificate mod {cert['modulus']} values {list(cert['values'])}"
        )
    witness = config.witnesses.get(j)
    if witness is None:
        return KnapsackEntry(
            j, tuple(reduced), None, Fraction(0), cell_weight * upper_cells, Fraction(0),
            Verdict.UNPROVEN, note=f"upper bound only ({note_ub}); no witness",
        )
    from .packing import rasterize

    raster = rasterize(witness, config.grid)
    if raster.max(initial=0) > 1:
        raise ValueError(f"class {j} witness placement overlaps")
    covered = int((raster > 0).sum())
    counts: dict[int, int] = {}
    for it in witness.items:
        counts[it.type_id] = counts.get(it.type_id, 0) + 1
    if any(tid not in reduced for tid in counts):
        raise ValueError(f"class {j} witness uses types outside {reduced}")
    pat = _pattern_of(counts, k)
    weight = pattern_weight(pat, lambdas)
    if weight != cell_weight * covered:
        raise AssertionError("witness weight inconsistent with cell count")
    if covered == upper_cells:
        return KnapsackEntry(
            j, tuple(reduced), pat, weight, weight, Fraction(0), Verdict.PRUNED_EXACT,
            note=f"max coverage {covered} = {width}^2-{width * width - covered}; {note_ub}",
        )
    return KnapsackEntry(
        j, tuple(reduced), pat, weight, cell_weight * upper_cells, Fraction(0),
        Verdict.UNPROVEN,
        note=f"witness covers {covered}, bound {upper_cells} ({note_ub})",
    )


def _heaviest_enumerated(j, instance, lambdas, config, reduced, use_area_pruning) -> KnapsackEntry:
    """Full enumeration over count vectors for small rectangle classes."""
    k = instance.k
    types = [instance.types[t - 1] for t in reduced]
    caps = [single_type_capacity(t) for t in types]
    candidates = []
    for counts in itertools.product(*(range(c + 1) for c in caps)):
        if counts[0] == 0:
            # a T_j pattern keeps at least one type-j item after reduction
            continue
        w = sum(c * lambdas[t.id - 1] for c, t in zip(counts, types))
        candidates.append((w, counts))
    candidates.sort(key=lambda e: (-e[0], sum(e[1])))
    unresolved_upper: Fraction | None = None
    for w, counts in candidates:
        if use_area_pruning:
            area = sum(
                Fraction(t.width.base * t.height.base) * c for c, t in zip(counts, types)
            )
            if area > 1:
                continue
        pat = _pattern_of({t.id: c for c, t in zip(counts, types) if c}, k)
        res = exhaustive_feasible(
            pat, instance.types, budget=config.search_budget, item_cap=config.item_cap
        )
        if isinstance(res, Feasible):
            if unresolved_upper is None:
                return KnapsackEntry(
                    j, tuple(reduced), pat, w, w, Fraction(0), Verdict.EXACT,
                    note="full enumeration over reduced count vectors",
                )
            return KnapsackEntry(
                j, tuple(reduced), pat, w, unresolved_upper, Fraction(0), Verdict.UNPROVEN,
                note="budget exceeded on a heavier candidate",
            )
        if isinstance(res, BudgetExceeded) and unresolved_upper is None:
            unresolved_upper = w
    return KnapsackEntry(
        j, tuple(reduced), None, Fraction(0),
        unresolved_upper if unresolved_upper is not None else Fraction(0),
        Fraction(0), Verdict.UNPROVEN if unresolved_upper is not None else Verdict.EXACT,
        note="no feasible candidate found",
    )


def verify_dominant_only(
    pattern: Pattern, instance: Instance, config: OracleConfig
) -> bool | None:
    """True iff adding one more item of the smallest used type is infeasible.

    None when the oracle exceeded its budget.
    """
    j = pattern.class_index
    counts = list(pattern.counts)
    counts[j - 1] += 1
    bigger = Pattern(tuple(counts))
    active = [t for t, c in enumerate(bigger.counts) if c]
    if len(active) == 1:
        t = instance.types[active[0]]
        return bigger.counts[active[0]] > single_type_capacity(t)
    grid = config.grid
    if grid is not None:
        spans = [grid_units(instance.types[t].width, grid) for t in active]
        if all(s is not None for s in spans):
            res = _grid_feasible(bigger, instance, grid)
            if res is not None:
                return not res
    res = exhaustive_feasible(
        bigger, instance.types, budget=config.search_budget, item_cap=config.item_cap
    )
    if isinstance(res, BudgetExceeded):
        return None
    return isinstance(res, Infeasible)


def _grid_feasible(pattern: Pattern, instance: Instance, grid: AnchorGrid) -> bool | None:
    """Exact feasibility for grid-aligned patterns via corner search.

    The corner-canonical search in grid_layout is complete, so None is
    only returned when the budget ran out.
    """
    from .packing import _corner_search

    w = grid.usable
    todo = []
    for idx, count in enumerate(pattern.counts):
        if count == 0:
            continue
        t = instance.types[idx]
        span = grid_units(t.width, grid)
        if span is None:
            raise ValueError(f"type {t.id} not grid aligned")
        todo.append((span, t, count))
    todo.sort(key=lambda e: -e[0])
    if sum(k * k * c for k, _, c in todo) > w * w:
        return False
    res = _corner_search(todo, w, backtrack=False, budget=1)
    if res is not None:
        return True
    res = _corner_search(todo, w, backtrack=True, budget=3_000_000)
    return None if res is None else bool(res)


def substitute_in_placement(
    placement: Placement,
    rule: DominanceRule,
    types: Sequence[ItemType],
    occurrence: int = 0,
) -> Placement:
    """Replace one dominated item by the m1 x m2 grid of dominator items.

    The replacement stays inside the old item's box, so the result passes
    verify_placement whenever the input did and the rule's size condition
    holds.
    """
    ti = types[rule.dominator - 1]
    seen = 0
    out: list[PlacedItem] = []
    done = False
    for it in placement.items:
        if not done and it.type_id == rule.dominated:
            if seen == occurrence:
                for a in range(rule.m1):
                    for b in range(rule.m2):
                        out.append(
                            PlacedItem(
                                ti.id,
                                it.x + ti.width.scale(a),
                                it.y + ti.height.scale(b),
                                ti.width,
                                ti.height,
                            )
                        )
                done = True
                seen += 1
                continue
            seen += 1
        out.append(it)
    if not done:
        raise ValueError(f"no occurrence {occurrence} of type {rule.dominated}")
    return Placement(tuple(out))
