"""Feasibility oracles for patterns in the unit bin.

Three regimes, matching how the instances are built:

* grid-aligned square items (sides are integer multiples of the anchor
  unit (1+eps)/G) are handled on the integer cell grid: placements
  rasterize exactly, so overlap and containment checks are integer
  arithmetic;
* small mixed patterns (rectangles, or anything not grid aligned) go
  through an exhaustive bottom-left search over normal positions with
  exact PerturbedSize arithmetic;
* coverage upper bounds for two-type square classes come from modular
  stripe certificates (see :func:`stripe_coverage_bound`).

Sand (the one type whose side is not a grid multiple) is never placed
item by item; it is counted via available anchor points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactnum import (
    ONE,
    AmbiguousOrderError,
    PerturbedSize,
    lex_le,
    max_multiple_le,
    rat,
)
from .model import ItemType, Pattern

__all__ = [
    "AnchorGrid",
    "PlacedItem",
    "Placement",
    "Feasible",
    "Infeasible",
    "BudgetExceeded",
    "grid_units",
    "grid_capacity",
    "grid_layout",
    "count_available_anchors",
    "rasterize",
    "verify_placement",
    "exhaustive_feasible",
    "axis_capacity",
    "single_type_capacity",
    "stripe_coverage_bound",
    "harmonic_anchor_count",
]


@dataclass(frozen=True)
class AnchorGrid:
    """G^d anchor points at integer multiples of (1+eps)/G per axis."""

    resolution: int
    dimension: int = 2

    @property
    def unit(self) -> PerturbedSize:
        g = self.resolution
        return PerturbedSize(Fraction(1, g), Fraction(1, g))

    @property
    def usable(self) -> int:
        """Cells per axis an item may cover: an item at anchor i spanning
        k units fits iff i + k <= G - 1."""
        return self.resolution - 1

    @property
    def total_anchors(self) -> int:
        return self.resolution**self.dimension


@dataclass(frozen=True)
class PlacedItem:
    type_id: int
    x: PerturbedSize
    y: PerturbedSize
    width: PerturbedSize
    height: PerturbedSize
    grid_pos: tuple[int, int] | None = None  # anchor indices when grid aligned
    grid_span: int | None = None


@dataclass(frozen=True)
class Placement:
    items: tuple[PlacedItem, ...]


@dataclass(frozen=True)
class Feasible:
    placement: Placement


@dataclass(frozen=True)
class Infeasible:
    reason: str = ""


@dataclass(frozen=True)
class BudgetExceeded:
    nodes: int


def grid_units(size: PerturbedSize, grid: AnchorGrid) -> int | None:
    """k with size == k * unit exactly, else None (e.g. sand)."""
    k = size.base * grid.resolution
    if k.denominator != 1:
        return None
    k = int(k)
    if k >= 1 and grid.unit.scale(k) == size:
        return k
    return None


def grid_capacity(k: int, grid: AnchorGrid) -> int:
    """Max count of k-unit hypercubes packable at anchors: floor((G-1)/k)^d."""
    if not 1 <= k <= grid.usable:
        raise ValueError(f"span {k} out of range 1..{grid.usable}")
    return (grid.usable // k) ** grid.dimension


def _grid_item(t: ItemType, k: int, i: int, j: int, grid: AnchorGrid) -> PlacedItem:
    u = grid.unit
    return PlacedItem(
        type_id=t.id, x=u.scale(i), y=u.scale(j), width=t.width, height=t.height,
        grid_pos=(i, j), grid_span=k,
    )


def grid_layout(
    pattern: Pattern, types: Sequence[ItemType], grid: AnchorGrid,
    budget: int = 2_000_000,
) -> Placement | None:
    """Layout of grid-aligned items on the (G-1)^2 cell grid.

    Corner-canonical placement: in any packing of axis-aligned squares,
    the first uncovered cell in row-major scan order is either sand or
    the bottom-left corner of some item, so it suffices to branch on
    which span sits there.  A greedy largest-first pass reproduces the
    square-block-plus-L-shell constructions directly (including fully
    tiled bins); a backtracking pass with a node budget covers the rest.
    Failure means no layout was found, never infeasibility.
    """
    if grid.dimension != 2:
        raise ValueError("grid_layout supports dimension 2")
    w = grid.usable
    todo: list[tuple[int, ItemType, int]] = []  # (span, type, count)
    for idx, count in enumerate(pattern.counts):
        if count == 0:
            continue
        t = types[idx]
        k = grid_units(t.width, grid)
        if k is None or grid_units(t.height, grid) != k:
            raise ValueError(f"type {t.id} size is not a multiple of the grid unit")
        todo.append((k, t, count))
    todo.sort(key=lambda e: -e[0])
    if sum(k * k * c for k, _, c in todo) > w * w:
        return None

    placements = _corner_search(todo, w, backtrack=False, budget=budget)
    if placements is None:
        placements = _corner_search(todo, w, backtrack=True, budget=budget)
    if placements is None:
        return None
    type_of = {k: t for k, t, _ in todo}
    return Placement(tuple(_grid_item(type_of[k], k, x, y, grid) for k, x, y in placements))


def _corner_search(todo, w: int, backtrack: bool, budget: int):
    """Fill the first uncovered cell with an item corner or mark it sand."""
    import sys

    spans = [k for k, _, _ in todo]
    avail = {k: c for k, _, c in todo}
    raster = np.zeros((w, w), dtype=bool)  # indexed [y, x]
    flat = raster.reshape(-1)  # shares memory, row-major in (y, x)
    total_items = sum(c for _, _, c in todo)
    slack = w * w - sum(k * k * c for k, _, c in todo)  # cells left to sand
    out: list[tuple[int, int, int]] = []

    def first_free(ptr: int) -> int:
        if ptr >= flat.size:
            return -1
        rest = flat[ptr:]
        idx = int(np.argmax(~rest))
        if rest[idx]:
            return -1
        return ptr + idx

    def fitting(pos: int) -> list[int]:
        y, x = divmod(pos, w)
        return [
            k
            for k in spans
            if avail[k] and x + k <= w and y + k <= w and not raster[y : y + k, x : x + k].any()
        ]

    def place(pos: int, k: int) -> None:
        y, x = divmod(pos, w)
        raster[y : y + k, x : x + k] = True
        avail[k] -= 1
        out.append((k, x, y))

    def unplace(pos: int, k: int) -> None:
        y, x = divmod(pos, w)
        raster[y : y + k, x : x + k] = False
        avail[k] += 1
        out.pop()

    if not backtrack:
        ptr = 0
        while any(avail.values()):
            pos = first_free(ptr)
            if pos < 0:
                return None
            ks = fitting(pos)
            if ks:
                place(pos, ks[0])
                ptr = pos + 1
            else:
                if slack == 0:
                    return None
                flat[pos] = True
                slack -= 1
                ptr = pos + 1
        return list(out)

    nodes = 0

    def dfs(ptr: int, slack_left: int) -> bool | None:
        nonlocal nodes
        if all(c == 0 for c in avail.values()):
            return True
        nodes += 1
        if nodes > budget:
            return None
        # forced sand: burn cells where nothing fits
        forced: list[int] = []

        def undo_forced() -> None:
            for p in forced:
                flat[p] = False

        while True:
            pos = first_free(ptr)
            if pos < 0:
                undo_forced()
                return False
            ks = fitting(pos)
            if ks:
                break
            if slack_left == 0:
                undo_forced()
                return False
            flat[pos] = True
            forced.append(pos)
            slack_left -= 1
            ptr = pos + 1
        for k in ks:
            place(pos, k)
            res = dfs(pos + 1, slack_left)
            if res:
                return True
            unplace(pos, k)
            if res is None:
                undo_forced()
                return None
        if slack_left > 0:
            flat[pos] = True
            res = dfs(pos + 1, slack_left - 1)
            if res:
                return True
            flat[pos] = False
            if res is None:
                undo_forced()
                return None
        undo_forced()
        return False

    limit = max(sys.getrecursionlimit(), total_items + min(slack, 40_000) + 1000)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(limit)
    try:
        res = dfs(0, slack)
    finally:
        sys.setrecursionlimit(old)
    return list(out) if res else None


def rasterize(placement: Placement, grid: AnchorGrid) -> np.ndarray:
    """Covered-anchor raster over the G x G anchor indices (exact)."""
    g = grid.resolution
    raster = np.zeros((g, g), dtype=np.int32)
    for it in placement.items:
        if it.grid_pos is None or it.grid_span is None:
            raise ValueError("rasterize requires grid-aligned placements")
        i, j = it.grid_pos
        k = it.grid_span
        if i < 0 or j < 0 or i + k > g - 1 or j + k > g - 1:
            raise ValueError(f"item at anchor ({i},{j}) span {k} leaves the bin")
        raster[i : i + k, j : j + k] += 1
    return raster


def count_available_anchors(placement: Placement, grid: AnchorGrid) -> int:
    """Anchors (x, y) such that no item covers (x + eps, y + eps).

    A grid-aligned item at anchor (i, j) spanning k units covers exactly
    the k^2 shifted points with indices i..i+k-1 x j..j+k-1.
    """
    raster = rasterize(placement, grid)
    if raster.max(initial=0) > 1:
        raise ValueError("overlapping placement")
    return int(grid.total_anchors - np.count_nonzero(raster))


# ---------------------------------------------------------------------------
# exact geometric checks on PerturbedSize coordinates


def _intervals_disjoint(a0, a1, b0, b1) -> bool:
    """Open-interior disjointness of [a0,a1] and [b0,b1] (may touch)."""
    return lex_le(a1, b0) or lex_le(b1, a0)


def verify_placement(placement: Placement, types: Sequence[ItemType] | None = None) -> bool:
    """Containment in the unit bin and pairwise non-overlap, exactly.

    Raises AmbiguousOrderError when a test would depend on the relative
    magnitude of eps and dlt.
    """
    zero = PerturbedSize.of(0)
    ends = []
    for it in placement.items:
        xe = it.x + it.width
        ye = it.y + it.height
        if not (lex_le(zero, it.x) and lex_le(zero, it.y)):
            return False
        if not (lex_le(xe, ONE) and lex_le(ye, ONE)):
            return False
        ends.append((it.x, xe, it.y, ye))
    for a in range(len(ends)):
        x0a, x1a, y0a, y1a = ends[a]
        for b in range(a + 1, len(ends)):
            x0b, x1b, y0b, y1b = ends[b]
            if not (
                _intervals_disjoint(x0a, x1a, x0b, x1b)
                or _intervals_disjoint(y0a, y1a, y0b, y1b)
            ):
                return False
    return True


# ---------------------------------------------------------------------------
# exhaustive search (normal positions, bottom-left order)


def axis_capacity(size: PerturbedSize) -> int:
    """Max items of this extent along one unit axis."""
    return max_multiple_le(size)


def single_type_capacity(t: ItemType) -> int:
    """Exact max count of one rectangle type alone in the bin.

    Any axis-aligned packing of copies of a single type normalizes to a
    grid of positions at multiples of the side lengths, so the maximum is
    the product of the per-axis capacities.
    """
    return axis_capacity(t.width) * axis_capacity(t.height)


def _normal_positions(sizes: list[PerturbedSize], item: PerturbedSize) -> list[PerturbedSize]:
    """All subset sums of `sizes` that still leave room for `item`."""
    zero = PerturbedSize.of(0)
    sums = {(zero.base, zero.eps, zero.dlt): zero}
    for s in sizes:
        addition = {}
        for v in sums.values():
            cand = v + s
            if lex_le(cand + item, ONE):
                addition[(cand.base, cand.eps, cand.dlt)] = cand
        sums.update(addition)
    out = list(sums.values())
    out.sort(key=lambda p: (p.base, p.eps, p.dlt))
    return out


def exhaustive_feasible(
    pattern: Pattern,
    types: Sequence[ItemType],
    budget: int = 10_000_000,
    item_cap: int = 30,
    use_structural_shortcuts: bool = True,
) -> Feasible | Infeasible | BudgetExceeded:
    """Complete branch-and-bound feasibility over canonical placements.

    Candidate coordinates are sums of sub-multisets of item widths
    (x axis) and heights (y axis); any feasible packing normalizes to such
    coordinates by pushing items left and down.  Infeasible is returned
    only when the search space is exhausted.
    """
    active = [(types[i], c) for i, c in enumerate(pattern.counts) if c]
    # conservative area prune: strict excess of the rational limit areas is
    # sound because the perturbations are infinitesimal
    area = sum(Fraction(t.width.base * t.height.base) * c for t, c in active)
    if area > 1:
        return Infeasible("total item area exceeds the bin")
    for t, c in active:
        if c > single_type_capacity(t):
            return Infeasible(f"type {t.id}: count {c} exceeds single-type capacity")
    if use_structural_shortcuts and len(active) == 1:
        t, c = active[0]
        cw = axis_capacity(t.width)
        out = [
            PlacedItem(t.id, t.width.scale(n % cw), t.height.scale(n // cw), t.width, t.height)
            for n in range(c)
        ]
        return Feasible(Placement(tuple(out)))

    items: list[ItemType] = []
    for t, c in active:
        items.extend([t] * c)
    if len(items) > item_cap:
        raise ValueError(f"pattern has {len(items)} items, above the cap {item_cap}")
    items.sort(key=lambda t: (-(t.width.base * t.height.base), t.id))

    # candidate positions depend only on the item's type
    xs_by_type: dict[int, list[PerturbedSize]] = {}
    ys_by_type: dict[int, list[PerturbedSize]] = {}
    for pos, t in enumerate(items):
        if t.id in xs_by_type:
            continue
        others_w = [o.width for q, o in enumerate(items) if q != pos]
        others_h = [o.height for q, o in enumerate(items) if q != pos]
        xs_by_type[t.id] = _normal_positions(others_w, t.width)
        ys_by_type[t.id] = _normal_positions(others_h, t.height)

    nodes = 0
    placed: list[tuple] = []  # (x0, x1, y0, y1, type_id, sortkey)

    def fits(x, y, x1, y1) -> bool:
        for px0, px1, py0, py1, *_ in placed:
            if not (
                _intervals_disjoint(x, x1, px0, px1)
                or _intervals_disjoint(y, y1, py0, py1)
            ):
                return False
        return True

    def dfs(idx: int):
        nonlocal nodes
        if idx == len(items):
            return True
        t = items[idx]
        prev_key = placed[-1][5] if idx and items[idx - 1].id == t.id else None
        for y in ys_by_type[t.id]:
            for x in xs_by_type[t.id]:
                key = (y.base, y.eps, y.dlt, x.base, x.eps, x.dlt)
                if prev_key is not None and key < prev_key:
                    continue
                nodes += 1
                if nodes > budget:
                    return None
                x1 = x + t.width
                y1 = y + t.height
                if fits(x, y, x1, y1):
                    placed.append((x, x1, y, y1, t.id, key))
                    res = dfs(idx + 1)
                    if res:
                        return True
                    placed.pop()
                    if res is None:
                        return None
        return False

    res = dfs(0)
    if res is None:
        return BudgetExceeded(nodes)
    if not res:
        return Infeasible("search space exhausted")
    out = [
        PlacedItem(tid, x0, y0, x1 - x0, y1 - y0)
        for (x0, x1, y0, y1, tid, _) in placed
    ]
    return Feasible(Placement(tuple(out)))


# ---------------------------------------------------------------------------
# placement files


def placement_to_doc(placement: Placement, grid: AnchorGrid) -> dict:
    items = []
    for it in placement.items:
        if it.grid_pos is None or it.grid_span is None:
            raise ValueError("only grid-aligned placements are serialized")
        items.append([it.type_id, it.grid_pos[0], it.grid_pos[1], it.grid_span])
    return {"grid": grid.resolution, "items": items}


def load_placement(path, types: Sequence[ItemType], grid: AnchorGrid) -> Placement:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if int(doc.get("grid", grid.resolution)) != grid.resolution:
        raise ValueError(f"{path}: placement grid {doc.get('grid')} != {grid.resolution}")
    items = []
    for tid, i, j, span in doc["items"]:
        t = types[int(tid) - 1]
        if grid_units(t.width, grid) != int(span) or grid_units(t.height, grid) != int(span):
            raise ValueError(f"{path}: span {span} does not match type {tid}")
        items.append(_grid_item(t, int(span), int(i), int(j), grid))
    return Placement(tuple(items))


# ---------------------------------------------------------------------------
# modular stripe certificates: coverage upper bounds for square mixes


def stripe_coverage_bound(
    spans: Sequence[int], width: int, modulus: int, period_values: Sequence[int]
) -> int | None:
    """Sound upper bound on cells coverable by axis-aligned squares.

    Weight cell (x, y) by v(x mod p) with v = period_values.  If for every
    span k in `spans` and every admissible x the window sum times k is
    divisible by `modulus`, the covered weight of any packing is 0 modulo
    `modulus`.  When the total grid weight T is not, at least
    ceil(dist/max|v|) cells stay uncovered, dist being the minimal
    absolute value congruent to T.  Returns width^2 - deficiency, or None
    when the certificate does not apply.
    """
    p = len(period_values)
    v = [int(c) for c in period_values]
    for k in spans:
        for x in range(width - k + 1):
            s = sum(v[(x + i) % p] for i in range(k))
            if (k * s) % modulus != 0:
                return None
    total = sum(v[x % p] for x in range(width)) * width
    t = total % modulus
    if t == 0:
        return width * width
    vmax = max(abs(c) for c in v)
    dist = min(t, modulus - t)
    return width * width - (-(-dist // vmax))


# ---------------------------------------------------------------------------
# anchor-count formulas for the Harmonic-type instance families


def harmonic_anchor_count(
    family: str, d: int, K: int, y, y_next=None
) -> int:
    """Count M of t-items packable beside one u-item and 2^d - 1 v-items.

    family "inner" covers instances 1..h (u = (1+eps)/2, v = (1+eps)y),
    family "cross" covers h+1..2h (u = (1+eps)(1-y')), family "top" covers
    instance 2h+1 (the "inner" shape evaluated at the last threshold).
    Divisibility preconditions: K/y integral (and K/(1-y') for "cross").
    """
    y = rat(y)
    if family in ("inner", "top"):
        q = Fraction(K) / y
        if q.denominator != 1:
            raise ValueError("K/y must be an integer")
        q = int(q)
        total = (2 * q - 1) ** d
        blocked = q**d + (2**d - 1) * (2 * K) ** d
    elif family == "cross":
        if y_next is None:
            raise ValueError("family 'cross' needs the next threshold y'")
        y_next = rat(y_next)
        q1 = Fraction(K) / y
        q2 = Fraction(K) / (1 - y_next)
        side = Fraction(K) / (y * (1 - y_next))
        if q1.denominator != 1 or q2.denominator != 1 or side.denominator != 1:
            raise ValueError("K/y, K/(1-y') and K/(y(1-y')) must be integers")
        total = (int(side) - 1) ** d
        blocked = int(q1) ** d + (2**d - 1) * int(q2) ** d
    else:
        raise ValueError(f"unknown family {family!r}")
    m = total - blocked
    if m < 0:
        raise ValueError("anchor count came out negative; K too small")
    return m
