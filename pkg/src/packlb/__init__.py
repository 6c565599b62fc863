"""Exact verification engine for online bin packing lower bounds."""

from .exactnum import Ordering, PerturbedSize, Rat, lex_compare, rat
from .model import (
    DualCertificate,
    Instance,
    ItemType,
    OptScheme,
    Pattern,
    PrimalSolution,
    coverage_check,
    load_certificate,
    load_instance,
    load_opt_scheme,
    load_primal_solution,
    pattern_weight,
)
from .packing import (
    AnchorGrid,
    BudgetExceeded,
    Feasible,
    Infeasible,
    Placement,
    count_available_anchors,
    exhaustive_feasible,
    grid_capacity,
    grid_layout,
    harmonic_anchor_count,
    verify_placement,
)
from .patterns import (
    DominanceRule,
    KnapsackReport,
    OracleConfig,
    Verdict,
    check_dominance,
    heaviest_pattern,
    reduced_type_set,
    verify_dominant_only,
)
from .lp import (
    BoundResult,
    build_dual,
    build_primal,
    solve_exact,
    verify_dual_certificate,
    verify_opt_scheme,
)
from .harmonic import (
    HarmonicParams,
    b1_bounds,
    b1_optimize,
    b2_bounds,
    b2_optimize,
    closed_form_bound,
    harmonic_instance_cost,
    harmonic_worst_case,
    ineq1,
    ineq2,
    ineq3,
    y_recursion,
)

__version__ = "0.1.0"
