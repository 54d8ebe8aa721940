"""Branch-and-bound MILP solver on top of the bounded-variable simplex.

Best-bound node selection, branching on the most fractional integer
variable (ties to the lowest index), no heuristics, no warm starts.  Node
ordering ties are broken by insertion order, so solves are deterministic.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import replace

import numpy as np

from .model import (
    INFEASIBLE,
    MAX,
    MIN,
    NODE_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    MilpProblem,
    MilpSolution,
    SolveTolerances,
)
from .simplex import solve_lp, solve_lp_with_state, warm_solve

_INF = float("inf")


def solve_milp(
    milp: MilpProblem,
    tol: SolveTolerances | None = None,
    node_limit: int = 200_000,
) -> MilpSolution:
    """Solve a mixed-integer LP to within ``tol.opt_gap`` (absolute)."""
    milp.validate()
    tol = tol or SolveTolerances()
    lp = milp.lp
    sign = 1.0 if lp.sense == MIN else -1.0
    int_idx = np.nonzero(milp.integer)[0]

    best_x: np.ndarray | None = None
    best_score = _INF
    nodes = 0
    iterations = 0
    counter = 0
    # heap entries: (parent score bound, -insertion counter, lower patch, upper patch);
    # newest-first among equal bounds dives depth-first, which matters when many
    # assignments tie (e.g. commitment decisions with no direct cost)
    heap: list[tuple[float, int, tuple, tuple]] = [(-_INF, -counter, (), ())]
    exhausted = True

    state = None  # rolling basis from the most recent solved node; bound
    # changes keep it dual feasible, so nodes re-solve in a few dual pivots
    while heap:
        bound, _, lo_patch, up_patch = heapq.heappop(heap)
        if bound >= best_score - tol.opt_gap:
            break  # best-bound order: everything left is pruned too
        if nodes >= node_limit:
            exhausted = False
            break
        nodes += 1
        node_lp = _patched(lp, lo_patch, up_patch)
        warmed = warm_solve(node_lp, tol, state) if state is not None else None
        if warmed is None:
            sol, new_state = solve_lp_with_state(node_lp, tol)
        else:
            sol, new_state = warmed
        if new_state is not None:
            state = new_state
        iterations += sol.iterations
        if sol.status == INFEASIBLE:
            continue
        if sol.status == UNBOUNDED:
            return MilpSolution(status=UNBOUNDED, objective=float("nan"), x=None,
                                nodes=nodes, gap=_INF, iterations=iterations)
        score = sign * sol.objective
        if score >= best_score - tol.opt_gap:
            continue
        j = _most_fractional(sol.x, int_idx, tol.int_tol)
        if j < 0:
            x = sol.x.copy()
            x[int_idx] = np.round(x[int_idx])
            best_x = x
            best_score = score
            continue
        down = math.floor(sol.x[j] + tol.int_tol)
        counter += 1
        heapq.heappush(heap, (score, -counter, lo_patch, up_patch + ((j, float(down)),)))
        counter += 1
        heapq.heappush(heap, (score, -counter, lo_patch + ((j, float(down + 1)),), up_patch))

    remaining = min((entry[0] for entry in heap), default=_INF)
    if best_x is None:
        if exhausted and not heap:
            return MilpSolution(status=INFEASIBLE, objective=float("nan"), x=None,
                                nodes=nodes, gap=_INF, iterations=iterations)
        return MilpSolution(status=NODE_LIMIT, objective=float("nan"), x=None,
                            nodes=nodes, gap=_INF, iterations=iterations)
    gap = max(0.0, best_score - min(remaining, best_score))
    status = OPTIMAL if exhausted else NODE_LIMIT
    return MilpSolution(
        status=status,
        objective=sign * best_score,
        x=best_x,
        nodes=nodes,
        gap=gap,
        iterations=iterations,
    )


def _patched(lp: LinearProgram, lo_patch: tuple, up_patch: tuple) -> LinearProgram:
    if not lo_patch and not up_patch:
        return lp
    lower = lp.lower.copy()
    upper = lp.upper.copy()
    for j, v in lo_patch:
        lower[j] = max(lower[j], v)
    for j, v in up_patch:
        upper[j] = min(upper[j], v)
    return replace(lp, lower=lower, upper=upper)


def _most_fractional(x: np.ndarray, int_idx: np.ndarray, int_tol: float) -> int:
    """Index of the integer variable farthest from integrality, or -1."""
    if int_idx.size == 0:
        return -1
    vals = x[int_idx]
    frac = np.abs(vals - np.round(vals))
    worst = int(np.argmax(frac))  # first max wins: lowest index tie-break
    if frac[worst] <= int_tol:
        return -1
    return int(int_idx[worst])
