"""Generic bounded-variable LP solver and branch-and-bound MILP solver."""

from .model import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    MAX,
    MIN,
    NODE_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    LpBuilder,
    LpSolution,
    MilpProblem,
    MilpSolution,
    SolveTolerances,
)
from .branch_bound import solve_milp
from .simplex import solve_lp
from .textio import dump_problem, parse_problem

__all__ = [
    "EQ", "GE", "LE", "MIN", "MAX",
    "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "NODE_LIMIT",
    "LinearProgram", "LpBuilder", "LpSolution", "MilpProblem", "MilpSolution",
    "SolveTolerances", "solve_lp", "solve_milp", "dump_problem", "parse_problem",
]
