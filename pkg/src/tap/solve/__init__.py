"""Exact solver stack: LP kernels, branch and bound, and the oracle."""

from .branch_bound import (
    BRUTE_FORCE_LIMIT,
    DiffObjective,
    SolveError,
    SolverParams,
    brute_force,
    presolve,
    resolve_with_min_changes,
    solve,
    solve_model,
)
from .simplex import (
    LP_INFEASIBLE,
    LP_ITERATION_LIMIT,
    LP_OPTIMAL,
    LP_UNBOUNDED,
    LinearProgram,
    LpResult,
    SimplexError,
    compiled_available,
    solve_lp,
)
from .revised import solve_lp_revised

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "DiffObjective",
    "LinearProgram",
    "LpResult",
    "LP_INFEASIBLE",
    "LP_ITERATION_LIMIT",
    "LP_OPTIMAL",
    "LP_UNBOUNDED",
    "SimplexError",
    "SolveError",
    "SolverParams",
    "brute_force",
    "compiled_available",
    "presolve",
    "resolve_with_min_changes",
    "solve",
    "solve_lp",
    "solve_lp_revised",
    "solve_model",
]
