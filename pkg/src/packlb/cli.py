"""Command-line front end.

Verbs: verify-dual, verify-opt, verify-primal, solve-lp, bound, explore.
Exit codes: 0 proven, 1 refuted, 2 unproven or budget exceeded, 3 I/O or
schema error.  Reports are byte-deterministic for identical inputs; all
numbers in input files are exact strings, decimals in reports are
explicitly display-only.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .exactnum import rat, rat_decimal
from .harmonic import (
    b1_optimize,
    b2_optimize,
    closed_form_bound,
    equalized_red_fraction,
    ineq1,
    ineq2,
    ineq3,
)
from .lp import (
    BoundResult,
    build_dual,
    build_primal,
    solve_exact,
    verify_dual_certificate,
    verify_opt_scheme,
)
from .model import (
    SchemaError,
    Pattern,
    coverage_check,
    load_certificate,
    load_instance,
    load_opt_scheme,
    load_primal_solution,
    pattern_weight,
)
from .packing import AnchorGrid, Feasible, exhaustive_feasible, grid_units, load_placement
from .patterns import OracleConfig

EXIT_PROVEN = 0
EXIT_REFUTED = 1
EXIT_UNPROVEN = 2
EXIT_SCHEMA = 3

DATA_ENV = "PACKLB_DATA"


def default_data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def resolve_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    for base in (os.environ.get(DATA_ENV), default_data_dir()):
        if base:
            cand = Path(base) / name
            if cand.exists():
                return cand
    raise SchemaError(f"file not found: {name}")


def _emit(lines: list[str], fmt: str, payload: dict | None = None) -> None:
    if fmt == "structured":
        doc = dict(payload or {})
        doc["report"] = lines
        print(json.dumps(doc, sort_keys=True, default=str))
    else:
        for line in lines:
            print(line)


def _status_exit(status: str) -> int:
    return {"proven": EXIT_PROVEN, "refuted": EXIT_REFUTED, "unproven": EXIT_UNPROVEN}[status]


def _oracle_config(args, instance) -> OracleConfig:
    grid = AnchorGrid(instance.grid_resolution) if instance.grid_resolution else None
    return OracleConfig(search_budget=args.budget, grid=grid)


def _attach_certificates(cert, instance, config, cert_path: Path) -> OracleConfig:
    """Pull stripe certificates and witness placements out of the aux data."""
    aux = cert.aux.get("knapsack", {})
    coverage_certs = {}
    witnesses = {}
    for key, spec in aux.items():
        j = int(key)
        coverage_certs[j] = {"modulus": spec["modulus"], "values": spec["values"]}
        wf = spec.get("witnessFile")
        if wf and config.grid is not None:
            witnesses[j] = load_placement(cert_path.parent / wf, instance.types, config.grid)
    return dataclasses.replace(config, coverage_certs=coverage_certs, witnesses=witnesses)


def cmd_verify_dual(args) -> int:
    instance = load_instance(resolve_path(args.instance))
    cert_path = resolve_path(args.certificate)
    cert = load_certificate(cert_path)
    config = _oracle_config(args, instance)
    config = _attach_certificates(cert, instance, config, cert_path)
    result = verify_dual_certificate(instance, cert, config)
    lines = [f"instance: {instance.name}"] + list(result.ledger)
    if result.bound is not None:
        lines.append(
            f"bound = {result.bound} (~ {rat_decimal(result.bound, args.digits)}, display only)"
        )
    lines.append(f"status = {result.status}")
    _emit(lines, args.format, {"status": result.status, "bound": result.bound})
    return _status_exit(result.status)


def _load_scheme_placements(doc_path: Path, instance, grid):
    with open(doc_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    placements = {}
    for prefix in doc.get("prefixes", []):
        for row in prefix:
            pf = row.get("placementFile")
            if pf and grid is not None:
                pl = load_placement(doc_path.parent / pf, instance.types, grid)
                counts = row["pattern"]
                if isinstance(counts, dict):
                    vec = [0] * instance.k
                    for kk, c in counts.items():
                        vec[int(kk) - 1] = int(c)
                    counts = vec
                placements[tuple(int(c) for c in counts)] = pl
    return placements


def cmd_verify_opt(args) -> int:
    instance = load_instance(resolve_path(args.instance))
    scheme_path = resolve_path(args.scheme)
    scheme = load_opt_scheme(scheme_path, instance.k)
    config = _oracle_config(args, instance)
    placements = _load_scheme_placements(scheme_path, instance, config.grid)
    result = verify_opt_scheme(instance, scheme, config, placements)
    lines = [f"instance: {instance.name}"] + list(result.ledger) + [f"status = {result.status}"]
    _emit(lines, args.format, {"status": result.status})
    return _status_exit(result.status)


def cmd_verify_primal(args) -> int:
    instance = load_instance(resolve_path(args.instance))
    sol = load_primal_solution(resolve_path(args.solution), instance.k)
    rows = coverage_check(sol, instance)
    lines = [f"instance: {instance.name}", f"R = {sol.ratio}"]
    ok = True
    for row in rows:
        rel = ">=" if row.kind == "type" else "<="
        mark = "tight" if row.tight else ("ok" if row.holds else "VIOLATED")
        ok = ok and row.holds
        lines.append(f"{row.kind}[{row.index}]: {row.lhs} {rel} {row.rhs} [{mark}]")
    status = "proven" if ok else "refuted"
    lines.append(f"status = {status}")
    _emit(lines, args.format, {"status": status})
    return _status_exit(status)


def _load_pattern_set(path, k: int) -> list[Pattern]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    raw = doc.get("patterns")
    if raw is None:
        raw = [e["pattern"] for e in doc["entries"]]
    out = []
    for vec in raw:
        if isinstance(vec, dict):
            counts = [0] * k
            for kk, c in vec.items():
                counts[int(kk) - 1] = int(c)
            out.append(Pattern(tuple(counts)))
        else:
            out.append(Pattern(tuple(int(c) for c in vec)))
    return out


def cmd_solve_lp(args) -> int:
    instance = load_instance(resolve_path(args.instance))
    patterns = _load_pattern_set(resolve_path(args.patterns), instance.k)
    config = _oracle_config(args, instance)
    # feasibility-certify the columns before building the LP
    from .lp import verify_opt_scheme as _unused  # noqa: F401
    from .packing import grid_layout

    certified = []
    for p in patterns:
        ok = False
        if config.grid is not None and instance.geometry == "hypercube":
            non_sand = list(p.counts)
            sand = 0
            grid_ok = True
            for idx in range(instance.k):
                if p.counts[idx] and grid_units(instance.types[idx].width, config.grid) is None:
                    sand += p.counts[idx]
                    non_sand[idx] = 0
            if any(non_sand):
                pl = grid_layout(Pattern(tuple(non_sand)), instance.types, config.grid)
                if pl is not None:
                    from .packing import count_available_anchors

                    ok = sand <= count_available_anchors(pl, config.grid)
            else:
                ok = sand <= config.grid.total_anchors
        if not ok and p.total_items <= config.item_cap:
            ok = isinstance(
                exhaustive_feasible(p, instance.types, budget=args.budget), Feasible
            )
        certified.append(ok)
    lines = [f"instance: {instance.name}", f"patterns: {len(patterns)}"]
    if not all(certified):
        bad = [i for i, c in enumerate(certified) if not c]
        lines.append(f"uncertified patterns at indices {bad}")
        lines.append("status = refuted")
        _emit(lines, args.format, {"status": "refuted"})
        return EXIT_REFUTED

    sides = ["primal", "dual"] if args.side == "both" else [args.side]
    values = {}
    for side in sides:
        prob = build_primal(instance, patterns, certified) if side == "primal" else build_dual(
            instance, patterns
        )
        res = solve_exact(prob)
        if res.status != "optimal":
            lines.append(f"{side}: {res.status}")
            lines.append("status = refuted")
            _emit(lines, args.format, {"status": "refuted"})
            return EXIT_REFUTED
        values[side] = res.optimum
        lines.append(
            f"{side} optimum = {res.optimum} (~ {rat_decimal(res.optimum, args.digits)}, display only)"
        )
        if args.verbose:
            for name, v in zip(prob.var_names, res.solution):
                if v:
                    lines.append(f"  {name} = {v}")
    if len(values) == 2:
        if values["primal"] == values["dual"]:
            lines.append("strong duality: primal = dual (exact)")
        else:
            lines.append("strong duality FAILED")
            lines.append("status = refuted")
            _emit(lines, args.format, {"status": "refuted"})
            return EXIT_REFUTED
    lines.append("status = proven")
    _emit(lines, args.format, {"status": "proven", "values": values})
    return EXIT_PROVEN


def cmd_bound(args) -> int:
    tol = Fraction(1, 10 ** args.tol_digits)
    lines = []
    if args.what == "harmonic":
        if args.table6:
            for d in range(1, 7):
                v = closed_form_bound(d)
                lines.append(f"d={d}: {v} (~ {rat_decimal(v, 5)})")
            lines.append("d->infinity: 3")
        else:
            v = closed_form_bound(args.d)
            lines.append(f"d={args.d}: {v} (~ {rat_decimal(v, args.digits)}, display only)")
    elif args.what in ("b1", "b2"):
        opt = b1_optimize(tol) if args.what == "b1" else b2_optimize(tol)
        lines.append(
            f"alpha* = ({opt.p} - sqrt({opt.q}))/{opt.r} in "
            f"[{rat_decimal(opt.alpha.lo, 12)}, {rat_decimal(opt.alpha.hi, 12)}]"
        )
        lines.append(
            f"bound at alpha* in [{rat_decimal(opt.bound.lo, 12)}, {rat_decimal(opt.bound.hi, 12)}]"
        )
    elif args.what == "harmonic-explore":
        lines.extend(_harmonic_explore(args.d, tol))
        lines.append("status = unproven (exploration only)")
        _emit(lines, args.format, None)
        return EXIT_UNPROVEN
    else:
        raise SchemaError(f"unknown bound target {args.what!r}")
    _emit(lines, args.format, None)
    return EXIT_PROVEN


def _harmonic_explore(d: int, tol: Fraction) -> list[str]:
    """Numeric look at the h=1 all-equalities point; no proven status."""
    lines = [f"exploring the h=1 equalized point in dimension {d}"]
    # solve ineq1(m(y), y0) = ineq3(y) for y by exact bisection on rationals
    y0 = Fraction(1, 3)

    def gap(y: Fraction) -> Fraction:
        m = equalized_red_fraction(d, y)
        return ineq1(d, m, y0) - ineq3(d, y)

    lo, hi = Fraction(1, 3) + Fraction(1, 1000), Fraction(1, 2) - Fraction(1, 1000)
    glo, ghi = gap(lo), gap(hi)
    if glo > 0:
        lines.append("no sign change; skipping bisection")
        return lines
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if gap(mid) <= 0:
            lo = mid
        else:
            hi = mid
    y = (lo + hi) / 2
    m = equalized_red_fraction(d, y)
    vals = (ineq1(d, m, y0), ineq2(d, m, y0, y), ineq3(d, y))
    lines.append(f"y_1 ~ {rat_decimal(y, 9)}  m_1 ~ {rat_decimal(m, 9)}")
    for name, v in zip(("ineq1", "ineq2", "ineq3"), vals):
        lines.append(f"{name} ~ {rat_decimal(v, 9)}")
    lines.append(
        "closed-form reference "
        f"{closed_form_bound(d)} (~ {rat_decimal(closed_form_bound(d), 9)})"
    )
    return lines


def cmd_explore(args) -> int:
    instance = load_instance(resolve_path(args.instance))
    path = resolve_path(args.conjecture)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    lambdas = [rat(v) for v in doc["lambda"]]
    mus = [rat(v) for v in doc["mu"]]
    lines = [f"instance: {instance.name} (exploratory; maximality is conjectural)"]
    bad = False
    if any(l < 0 for l in lambdas) or any(m > 0 for m in mus):
        lines.append("sign constraints violated")
        bad = True
    opt_lhs = -sum((m * r for m, r in zip(mus, instance.opt_ratios)), Fraction(0))
    lines.append(
        f"-sum mu_j optRatio_j = {opt_lhs}" + (" (equality)" if opt_lhs == 1 else "")
    )
    if opt_lhs > 1:
        bad = True
    bound = sum((a * l for a, l in zip(instance.alphas, lambdas)), Fraction(0))
    lines.append(
        f"conjectured bound = {bound} (~ {rat_decimal(bound, args.digits)}, display only)"
    )
    for entry in doc.get("conjecturedPatterns", []):
        j = entry["class"]
        counts = entry["pattern"]
        vec = [0] * instance.k
        for kk, c in counts.items():
            vec[int(kk) - 1] = int(c)
        pat = Pattern(tuple(vec))
        w = pattern_weight(pat, lambdas)
        cap = -sum(mus[j - 1 :], Fraction(0))
        verdictbits = [f"class {j}: weight {w} vs capacity {cap}"]
        if pat.total_items <= args.item_cap:
            res = exhaustive_feasible(pat, instance.types, budget=args.budget)
            verdictbits.append(
                "feasible" if isinstance(res, Feasible) else type(res).__name__.lower()
            )
        else:
            feas = entry.get("feasibility", "unchecked (above search cap)")
            verdictbits.append(str(feas))
        if w > cap:
            verdictbits.append("OVER CAPACITY")
            bad = True
        lines.append("; ".join(verdictbits))
    lines.append("status = " + ("refuted" if bad else "unproven"))
    _emit(lines, args.format, None)
    return EXIT_REFUTED if bad else EXIT_UNPROVEN


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="packlb",
        description="exact verification of online bin packing lower bounds",
    )
    ap.add_argument("--format", choices=("text", "structured"), default="text")
    ap.add_argument("--budget", type=int, default=10_000_000, help="search node budget")
    ap.add_argument("--tol-digits", type=int, default=12, help="interval tolerance 10^-n")
    ap.add_argument("--digits", type=int, default=7, help="decimal digits in reports")
    ap.add_argument("--item-cap", type=int, default=40, help="exhaustive search item cap")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-dual", help="verify a dual certificate")
    p.add_argument("instance")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify_dual)

    p = sub.add_parser("verify-opt", help="verify an offline packing scheme")
    p.add_argument("instance")
    p.add_argument("scheme")
    p.set_defaults(func=cmd_verify_opt)

    p = sub.add_parser("verify-primal", help="check a primal solution's constraints")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_verify_primal)

    p = sub.add_parser("solve-lp", help="solve the pattern LP exactly")
    p.add_argument("instance")
    p.add_argument("patterns")
    p.add_argument("--side", choices=("primal", "dual", "both"), default="primal")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_solve_lp)

    p = sub.add_parser("bound", help="parametric Harmonic-type bounds")
    p.add_argument("what", choices=("harmonic", "b1", "b2", "harmonic-explore"))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--table6", action="store_true")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("explore", help="exploratory conjecture data (never proven)")
    p.add_argument("instance")
    p.add_argument("conjecture")
    p.set_defaults(func=cmd_explore)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
