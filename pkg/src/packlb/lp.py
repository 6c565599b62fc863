"""Exact LP construction/solution and end-to-end certificate verification.

The solver is a two-phase primal simplex over Fractions with Bland's
smallest-index rule (no cycling, no tolerances); problems here have at
most a few dozen rows, so speed is irrelevant.  The Proven verdict of
verify_dual_certificate never depends on the solver: it rests only on
sign checks, exact arithmetic and the knapsack oracles.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .exactnum import Rat, rat_decimal
from .model import (
    CoverageRow,
    DualCertificate,
    Instance,
    OptScheme,
    Pattern,
    PrimalSolution,
    coverage_check,
    pattern_weight,
)
from .packing import (
    AnchorGrid,
    Feasible,
    Placement,
    count_available_anchors,
    exhaustive_feasible,
    grid_layout,
    grid_units,
    rasterize,
    verify_placement,
)
from .patterns import (
    DominanceRule,
    KnapsackEntry,
    KnapsackReport,
    OracleConfig,
    Verdict,
    check_dominance,
    heaviest_pattern,
)

__all__ = [
    "LpProblem",
    "LpResult",
    "BoundResult",
    "solve_exact",
    "build_primal",
    "build_dual",
    "verify_dual_certificate",
    "verify_opt_scheme",
]


@dataclass(frozen=True)
class LpProblem:
    """minimize c.x subject to rows (a, sense, b), x >= 0.

    sense is one of "<=", ">=", "=".
    """

    objective: tuple[Fraction, ...]
    rows: tuple[tuple[tuple[Fraction, ...], str, Fraction], ...]
    maximize: bool = False
    var_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    optimum: Fraction | None
    solution: tuple[Fraction, ...] | None


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    for r in range(len(tab)):
        if r != row and tab[r][col] != 0:
            factor = tab[r][col]
            tab[r] = [a - factor * b for a, b in zip(tab[r], tab[row])]
    basis[row] = col


def _simplex(
    tab: list[list[Fraction]], basis: list[int], cost: list[Fraction], active: int
) -> str:
    """Minimize cost.x in place; Bland's rule; only columns < active may enter."""
    m = len(tab)
    n = len(tab[0]) - 1
    # reduced costs row
    z = list(cost) + [Fraction(0)]
    for r in range(m):
        cb = cost[basis[r]]
        if cb != 0:
            z = [a - cb * b for a, b in zip(z, tab[r])]
    while True:
        col = next((jj for jj in range(active) if z[jj] < 0), None)
        if col is None:
            return "optimal"
        best = None
        for r in range(m):
            if tab[r][col] > 0:
                ratio = tab[r][n] / tab[r][col]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            return "unbounded"
        row = best[1]
        piv = tab[row][col]
        tab[row] = [v / piv for v in tab[row]]
        for r in range(m):
            if r != row and tab[r][col] != 0:
                f = tab[r][col]
                tab[r] = [a - f * b for a, b in zip(tab[r], tab[row])]
        f = z[col]
        if f != 0:
            z = [a - f * b for a, b in zip(z, tab[row])]
        basis[row] = col


def solve_exact(problem: LpProblem) -> LpResult:
    """Exact two-phase simplex; every constraint holds exactly at the optimum."""
    nvar = len(problem.objective)
    rows = []
    for coeffs, sense, rhs in problem.rows:
        coeffs = list(coeffs)
        if rhs < 0:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        rows.append((coeffs, sense, rhs))
    nslack = sum(1 for _, s, _ in rows if s in ("<=", ">="))
    total = nvar + nslack + len(rows)  # slacks then artificials
    tab: list[list[Fraction]] = []
    basis: list[int] = []
    si = nvar
    ai = nvar + nslack
    for coeffs, sense, rhs in rows:
        row = [Fraction(0)] * (total + 1)
        for jj, a in enumerate(coeffs):
            row[jj] = a
        if sense == "<=":
            row[si] = Fraction(1)
            basis_col = si
            si += 1
        elif sense == ">=":
            row[si] = Fraction(-1)
            si += 1
            row[ai] = Fraction(1)
            basis_col = ai
            ai += 1
        else:
            row[ai] = Fraction(1)
            basis_col = ai
            ai += 1
        row[total] = rhs
        # <= rows with a slack basis are fine; >=/= start on artificials
        tab.append(row)
        basis.append(basis_col)
    # phase 1
    art_start = nvar + nslack
    phase1 = [Fraction(0)] * total
    for jj in range(art_start, total):
        phase1[jj] = Fraction(1)
    status = _simplex(tab, basis, phase1, active=total)
    if status == "unbounded":
        return LpResult("infeasible", None, None)
    obj1 = sum(
        tab[r][total] for r in range(len(tab)) if basis[r] >= art_start
    )
    if obj1 != 0:
        return LpResult("infeasible", None, None)
    # drive artificials out of the basis where possible
    for r in range(len(tab)):
        if basis[r] >= art_start:
            col = next((jj for jj in range(art_start) if tab[r][jj] != 0), None)
            if col is not None:
                _pivot(tab, basis, r, col)
    # phase 2: artificial columns are frozen (never priced back in)
    sign = Fraction(-1) if problem.maximize else Fraction(1)
    cost = [sign * c for c in problem.objective] + [Fraction(0)] * (total - nvar)
    status = _simplex(tab, basis, cost, active=art_start)
    if status == "unbounded":
        return LpResult("unbounded", None, None)
    x = [Fraction(0)] * nvar
    for r, b in enumerate(basis):
        if b < nvar:
            x[b] = tab[r][len(tab[0]) - 1]
    opt = sum(c * v for c, v in zip(problem.objective, x))
    return LpResult("optimal", opt, tuple(x))


# ---------------------------------------------------------------------------
# LP construction


def build_primal(
    instance: Instance,
    patterns: Sequence[Pattern],
    certified: Sequence[bool] | None = None,
) -> LpProblem:
    """min R s.t. coverage >= alpha and prefix sums <= optRatio_j * R."""
    if not patterns:
        raise ValueError("empty pattern set")
    if certified is not None and not all(certified):
        bad = [i for i, c in enumerate(certified) if not c]
        raise ValueError(f"uncertified patterns at indices {bad}")
    k = instance.k
    nvar = len(patterns) + 1  # x(p)..., R
    rows = []
    names = []
    for j in range(1, k + 1):
        coeffs = [Fraction(p.counts[j - 1]) for p in patterns] + [Fraction(0)]
        rows.append((tuple(coeffs), ">=", instance.alphas[j - 1]))
        names.append(f"cover[{j}]")
    for j in range(1, k + 1):
        coeffs = [
            Fraction(1 if p.class_index <= j else 0) for p in patterns
        ] + [-instance.opt_ratios[j - 1]]
        rows.append((tuple(coeffs), "<=", Fraction(0)))
        names.append(f"prefix[{j}]")
    objective = tuple([Fraction(0)] * len(patterns) + [Fraction(1)])
    return LpProblem(
        objective=objective,
        rows=tuple(rows),
        maximize=False,
        var_names=tuple(f"x[{i}]" for i in range(len(patterns))) + ("R",),
        row_names=tuple(names),
    )


def build_dual(instance: Instance, patterns: Sequence[Pattern]) -> LpProblem:
    """max sum alpha_j lambda_j of the dual (variables lambda >= 0, nu = -mu >= 0)."""
    k = instance.k
    rows = []
    names = []
    for i, p in enumerate(patterns):
        j = p.class_index
        coeffs = [Fraction(p.counts[t]) for t in range(k)]
        coeffs += [Fraction(-1) if t + 1 >= j else Fraction(0) for t in range(k)]
        rows.append((tuple(coeffs), "<=", Fraction(0)))
        names.append(f"pattern[{i}]")
    coeffs = [Fraction(0)] * k + [instance.opt_ratios[t] for t in range(k)]
    rows.append((tuple(coeffs), "<=", Fraction(1)))
    names.append("opt-ratio")
    objective = tuple(list(instance.alphas) + [Fraction(0)] * k)
    return LpProblem(
        objective=objective,
        rows=tuple(rows),
        maximize=True,
        var_names=tuple(f"lambda[{j}]" for j in range(1, k + 1))
        + tuple(f"nu[{j}]" for j in range(1, k + 1)),
        row_names=tuple(names),
    )


# ---------------------------------------------------------------------------
# certificate verification


@dataclass(frozen=True)
class BoundResult:
    status: str  # "proven" | "refuted" | "unproven"
    bound: Fraction | None
    ledger: tuple[str, ...]
    knapsack: KnapsackReport | None = None

    def render(self, digits: int = 7) -> str:
        lines = list(self.ledger)
        if self.bound is not None:
            lines.append(
                f"bound = {self.bound} (~ {rat_decimal(self.bound, digits)}, display only)"
            )
        lines.append(f"status = {self.status}")
        return "\n".join(lines)


def verify_dual_certificate(
    instance: Instance,
    cert: DualCertificate,
    config: OracleConfig | None = None,
) -> BoundResult:
    """Check the dual certificate; Proven depends only on exact checks."""
    config = config or OracleConfig()
    if config.grid is None and instance.grid_resolution:
        config = dataclasses.replace(config, grid=AnchorGrid(instance.grid_resolution))
    ledger: list[str] = []
    k = instance.k
    if len(cert.lambdas) != k:
        return BoundResult("refuted", None, (f"certificate has {len(cert.lambdas)} types, instance {k}",))

    for j, lam in enumerate(cert.lambdas, start=1):
        if lam < 0:
            return BoundResult("refuted", None, (f"lambda[{j}] = {lam} < 0",))
    for j, mu in enumerate(cert.mus, start=1):
        if mu > 0:
            return BoundResult("refuted", None, (f"mu[{j}] = {mu} > 0",))
    ledger.append("sign constraints: ok")

    rules = [DominanceRule(*r) for r in cert.dominance]
    for r in rules:
        if not check_dominance(r, instance.types, cert.lambdas):
            return BoundResult(
                "refuted", None,
                tuple(ledger) + (f"dominance rule ({r.m1}x{r.m2}) s_{r.dominator} > s_{r.dominated} fails",),
            )
    ledger.append(f"dominance rules: {len(rules)} verified")

    opt_lhs = -sum(
        (mu * r for mu, r in zip(cert.mus, instance.opt_ratios)), Fraction(0)
    )
    if opt_lhs > 1:
        return BoundResult(
            "refuted", None, tuple(ledger) + (f"-sum mu_j optRatio_j = {opt_lhs} > 1",)
        )
    ledger.append(
        f"opt-ratio constraint: -sum mu_j optRatio_j = {opt_lhs} <= 1"
        + (" (equality)" if opt_lhs == 1 else "")
    )

    entries = []
    unproven = False
    violated = None
    for j in range(1, k + 1):
        entry = heaviest_pattern(j, instance, cert.lambdas, config, rules)
        entry = dataclasses.replace(entry, capacity=cert.capacity(j))
        entries.append(entry)
        if not entry.verdict.at_least(Verdict.PRUNED_EXACT):
            unproven = True
        # a refutation must rest on a *witnessed* over-heavy pattern
        if entry.pattern is not None and entry.weight > entry.capacity:
            violated = entry
        ledger.append(
            f"class {j}: types {list(entry.reduced_types)} witnessed weight {entry.weight},"
            f" upper bound {entry.upper}, capacity {entry.capacity}"
            f" [{entry.verdict.value}]"
            + (" TIGHT" if entry.upper == entry.capacity == entry.weight else "")
            + (f" ({entry.note})" if entry.note else "")
        )
    report = KnapsackReport(tuple(entries))
    if violated is not None:
        pat = violated.pattern.counts if violated.pattern else None
        return BoundResult(
            "refuted", None,
            tuple(ledger)
            + (
                f"class {violated.class_index} knapsack violated: witnessed weight"
                f" {violated.weight} > capacity {violated.capacity}; witness pattern {pat}",
            ),
            report,
        )
    if unproven or any(e.upper > e.capacity for e in entries):
        notes = tuple(
            f"class {e.class_index} unresolved: upper {e.upper} vs capacity {e.capacity}"
            for e in entries
            if not e.verdict.at_least(Verdict.PRUNED_EXACT) or e.upper > e.capacity
        )
        return BoundResult("unproven", None, tuple(ledger) + notes, report)
    bound = sum((a * lam for a, lam in zip(instance.alphas, cert.lambdas)), Fraction(0))
    return BoundResult("proven", bound, tuple(ledger), report)


# ---------------------------------------------------------------------------
# offline packing schemes


def verify_opt_scheme(
    instance: Instance,
    scheme: OptScheme,
    config: OracleConfig | None = None,
    placements: dict | None = None,
) -> BoundResult:
    """Certify that the scheme packs every prefix at the declared ratio.

    Each pattern is feasibility-certified via a supplied placement, the
    grid layout generator, or the exhaustive oracle; coverage and ratio
    checks are exact arithmetic.
    """
    config = config or OracleConfig()
    grid = config.grid
    if grid is None and instance.grid_resolution:
        grid = AnchorGrid(instance.grid_resolution)
    placements = placements or {}
    ledger: list[str] = []
    failures: list[str] = []
    certified: dict[tuple[int, ...], str] = {}

    def certify(pattern: Pattern) -> str | None:
        key = pattern.counts
        if key in certified:
            return certified[key]

        def fail(msg: str) -> None:
            failures.append(msg)
            certified[key] = None

        how = None
        sand_index = None
        if grid is not None and instance.geometry == "hypercube":
            non_sand = list(pattern.counts)
            grid_ok = True
            for idx in range(instance.k):
                if pattern.counts[idx] and grid_units(instance.types[idx].width, grid) is None:
                    if sand_index is not None:
                        grid_ok = False
                        break
                    sand_index = idx
                    non_sand[idx] = 0
            if grid_ok:
                pl = placements.get(key)
                if pl is None and any(non_sand):
                    pl = grid_layout(Pattern(tuple(non_sand)), instance.types, grid)
                if pl is not None or not any(non_sand):
                    avail = (
                        count_available_anchors(pl, grid) if pl is not None else grid.total_anchors
                    )
                    sand = pattern.counts[sand_index] if sand_index is not None else 0
                    if sand <= avail:
                        how = f"anchor layout, {avail} anchors free for {sand} sand items"
                    else:
                        fail(f"pattern {key}: needs {sand} sand items, only {avail} anchors")
                        return None
        if how is None:
            if pattern.total_items <= config.item_cap:
                res = exhaustive_feasible(
                    pattern, instance.types, budget=config.search_budget, item_cap=config.item_cap
                )
                if isinstance(res, Feasible):
                    how = "exhaustive search witness"
                else:
                    fail(f"pattern {key}: {res}")
                    return None
            else:
                fail(f"pattern {key}: no certification route")
                return None
        certified[key] = how
        return how

    if len(scheme.prefixes) != instance.k:
        return BoundResult(
            "refuted", None, (f"scheme has {len(scheme.prefixes)} prefixes, instance {instance.k}",)
        )
    for j, prefix in enumerate(scheme.prefixes, start=1):
        bins = sum((b for _, b in prefix), Fraction(0))
        if bins != instance.opt_ratios[j - 1]:
            failures.append(
                f"prefix {j}: bins {bins} != declared ratio {instance.opt_ratios[j - 1]}"
            )
        for p, b in prefix:
            if b < 0:
                failures.append(f"prefix {j}: negative bin count")
            certify(p)
        for i in range(1, j + 1):
            got = sum((p.counts[i - 1] * b for p, b in prefix), Fraction(0))
            need = instance.alphas[i - 1]
            if got < need:
                failures.append(f"prefix {j}: coverage shortfall type {i}: {got} < {need}")
        ledger.append(f"prefix {j}: bins {bins}, {len(prefix)} patterns")
    if failures:
        return BoundResult("refuted", None, tuple(ledger) + tuple(failures))
    ledger.append("all prefixes certified")
    return BoundResult("proven", None, tuple(ledger))
