"""Worst-case admissibility check for a candidate boundary.

The bi-level program (worst deviation vertex maximizing the minimal
recourse cost) is flattened by replacing the inner dispatch LP with its
dual.  In the canonical recourse encoding every constraint is a ``<=``
row over nonnegative variables, so the dual variables are uniformly
nonpositive and the products between duals and deviation indicators can
be linearized exactly with one-sided big-M envelopes.  The resulting
single-level MILP is solved by branch and bound; the winning vertex is
then re-evaluated with a clean primal solve whose duals feed the
feasibility cut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BigMTooSmallError, CapExceededError, MalformedProblemError
from .grid import (
    Network,
    PriceSchedule,
    RecourseIndex,
    RecourseSolution,
    UcSchedule,
    assemble_recourse_lp,
    wind_row_map,
)
from .lp import (
    LE,
    MAX,
    NODE_LIMIT,
    OPTIMAL,
    LpBuilder,
    MilpProblem,
    MilpSolution,
    SolveTolerances,
    solve_lp,
    solve_milp,
)
from .uncertainty import (
    AdmissibilityBoundary,
    UncertaintyBudgets,
    UncertaintyVertex,
    enumerate_vertices,
    realize_wind,
)

DEFAULT_MBIG_PRICE_FACTOR = 10.0
VERDICT_TOL = 1e-5


def default_m_big(prices: PriceSchedule) -> float:
    """Envelope constant: a safety factor above every recourse price, which
    caps the dual values the envelopes must accommodate."""
    return DEFAULT_MBIG_PRICE_FACTOR * float(
        max(prices.curtail.max(initial=0.0), prices.shed.max(initial=0.0), 1.0)
    )


@dataclass
class CompiledSubproblem:
    """Single-level MILP together with the index maps needed to read it."""

    milp: MilpProblem
    net: Network
    uc: UcSchedule
    prices: PriceSchedule
    boundary: AdmissibilityBoundary
    budgets: UncertaintyBudgets
    m_big: float
    n_rows: int  # inner LP rows == dual variable count
    off_v: int  # first deviation-indicator column (up block then down block)
    off_gamma: int
    d_entries: list[tuple[int, int, float]]  # (inner row, v column offset, coefficient)
    b_zero: np.ndarray  # inner rhs at zero wind output
    wind_rows: list[list[tuple[int, float]]]  # per cell: rows carrying the wind rhs


@dataclass
class SubproblemResult:
    objective: float  # worst-case recourse cost, from the clean primal re-solve
    vertex: UncertaintyVertex
    lam: np.ndarray  # dual vector of the inner LP at the worst vertex
    recourse: RecourseSolution
    boundary: AdmissibilityBoundary
    realized_wind: np.ndarray
    milp_objective: float | None = None
    milp_gap: float = 0.0
    status: str = OPTIMAL
    bilinear_residual: float = 0.0
    nodes: int = 0


@dataclass
class AdmissibilityVerdict:
    admissible: bool
    worst_cost: float
    c_loss: float
    tol: float
    certificate: SubproblemResult


def compile_subproblem(
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
    boundary: AdmissibilityBoundary,
    budgets: UncertaintyBudgets,
    m_big: float | None = None,
) -> CompiledSubproblem:
    """Dualize the inner LP and linearize the dual-indicator products."""
    fc = net.forecast()
    boundary.validate(fc, net.capacities())
    budgets.validate(net.n_farms, net.n_periods)
    m_big = default_m_big(prices) if m_big is None else float(m_big)
    if m_big <= 0:
        raise MalformedProblemError("m_big must be positive")

    inner = assemble_recourse_lp(net, uc, prices, np.zeros_like(fc))
    b_zero = inner.rhs.copy()
    rows_by_cell = wind_row_map(net)
    m_count, t_count = fc.shape
    n_cells = m_count * t_count

    bld = LpBuilder(MAX)
    lam = [
        bld.add_var(f"lam[{name}]", lower=-math.inf, upper=0.0)
        for name in (inner.row_names or [str(i) for i in range(inner.n_rows)])
    ]
    off_v = bld.n_vars
    # deviating to a boundary that coincides with the forecast is a no-op, so
    # such indicators are pinned off; this also drops their bilinear terms
    for tag, arr in (("u", boundary.upper), ("l", boundary.lower)):
        for m in range(m_count):
            for t in range(t_count):
                live = abs(arr[m, t] - fc[m, t]) > 1e-12
                bld.add_var(f"v{tag}[{m},{t}]", lower=0.0,
                            upper=1.0 if live else 0.0, integer=True)

    # objective: lam . b(v) with b(v) affine in v; the wind realization at a
    # vertex is forecast*(1 - vu - vl) + upper*vu + lower*vl per cell
    obj_lam = b_zero.copy()
    d_entries: list[tuple[int, int, float]] = []
    for cell in range(n_cells):
        m, t = divmod(cell, t_count)
        for i, coef in rows_by_cell[cell]:
            obj_lam[i] += coef * fc[m, t]
            d_up = coef * (boundary.upper[m, t] - fc[m, t])
            if abs(d_up) > 1e-12:
                d_entries.append((i, off_v + cell, d_up))
            d_lo = coef * (boundary.lower[m, t] - fc[m, t])
            if abs(d_lo) > 1e-12:
                d_entries.append((i, off_v + n_cells + cell, d_lo))
    for i in range(inner.n_rows):
        bld.set_objective(lam[i], float(obj_lam[i]))

    off_gamma = bld.n_vars
    gammas = [
        bld.add_var(f"gamma[{k}]", lower=-math.inf, upper=0.0, obj=float(coef))
        for k, (_, _, coef) in enumerate(d_entries)
    ]

    # dual feasibility rows: one per inner column
    for j in range(inner.n_vars):
        col = inner.a[:, j]
        terms = [(lam[i], float(col[i])) for i in np.nonzero(col)[0]]
        name = inner.var_names[j] if inner.var_names else f"x{j}"
        bld.add_row(terms, LE, float(inner.obj[j]), f"dual[{name}]")

    # deviation budgets
    for m in range(m_count):
        terms = [(off_v + m * t_count + t, 1.0) for t in range(t_count)]
        terms += [(off_v + n_cells + m * t_count + t, 1.0) for t in range(t_count)]
        bld.add_row(terms, LE, float(budgets.gamma_t), f"budget_time[{m}]")
    for t in range(t_count):
        terms = [(off_v + m * t_count + t, 1.0) for m in range(m_count)]
        terms += [(off_v + n_cells + m * t_count + t, 1.0) for m in range(m_count)]
        bld.add_row(terms, LE, float(budgets.gamma_s), f"budget_space[{t}]")
    for cell in range(n_cells):
        bld.add_row(
            [(off_v + cell, 1.0), (off_v + n_cells + cell, 1.0)], LE, 1.0,
            f"one_sign[{cell}]",
        )

    # big-M envelopes making gamma_k = lam_i * v_y exact at binary v
    per_row: dict[int, list[int]] = {}
    for k, (i, y, _) in enumerate(d_entries):
        g = gammas[k]
        bld.add_row([(g, -1.0), (y, -m_big)], LE, 0.0, f"env_lo[{k}]")
        bld.add_row([(lam[i], 1.0), (g, -1.0)], LE, 0.0, f"env_hi[{k}]")
        bld.add_row([(lam[i], -1.0), (g, 1.0), (y, m_big)], LE, m_big, f"env_gap[{k}]")
        per_row.setdefault(i, []).append(g)
    # a row's indicators are mutually exclusive, so its linearized products
    # jointly stay above the dual: sum_y gamma_iy >= lam_i * sum_y v_y >= lam_i.
    # redundant at binary points, but it halves the relaxation's slack
    for i, gs in per_row.items():
        if len(gs) > 1:
            bld.add_row([(lam[i], 1.0)] + [(g, -1.0) for g in gs], LE, 0.0,
                        f"env_pair[{i}]")

    return CompiledSubproblem(
        milp=bld.build_milp(),
        net=net,
        uc=uc,
        prices=prices,
        boundary=boundary,
        budgets=budgets,
        m_big=m_big,
        n_rows=inner.n_rows,
        off_v=off_v,
        off_gamma=off_gamma,
        d_entries=d_entries,
        b_zero=b_zero,
        wind_rows=rows_by_cell,
    )


def _vertex_from_solution(cs: CompiledSubproblem, x: np.ndarray) -> UncertaintyVertex:
    m_count, t_count = cs.net.forecast().shape
    n_cells = m_count * t_count
    up = np.rint(x[cs.off_v : cs.off_v + n_cells]).astype(np.int8)
    dn = np.rint(x[cs.off_v + n_cells : cs.off_v + 2 * n_cells]).astype(np.int8)
    vertex = UncertaintyVertex(
        up=up.reshape(m_count, t_count), down=dn.reshape(m_count, t_count)
    )
    vertex.validate(cs.budgets)
    return vertex


def _clean_resolve(
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
    boundary: AdmissibilityBoundary,
    vertex: UncertaintyVertex,
    tol: SolveTolerances,
) -> tuple[float, np.ndarray, RecourseSolution, np.ndarray]:
    """Primal inner solve at the realized wind; duals feed the cuts."""
    wind = realize_wind(vertex, boundary, net.forecast())
    lp = assemble_recourse_lp(net, uc, prices, wind)
    sol = solve_lp(lp, tol)
    if sol.status != OPTIMAL:
        raise MalformedProblemError(f"inner recourse LP came back {sol.status}")
    idx = RecourseIndex(net)
    t_count = net.n_periods
    x = sol.x
    rec = RecourseSolution(
        p=np.array([[x[idx.p(g, t)] for t in range(t_count)] for g in range(net.n_gens)]),
        theta=np.array(
            [[x[idx.theta(n, t)] - math.pi for t in range(t_count)]
             for n in range(net.n_nodes)]
        ),
        curtailment=np.array(
            [[x[idx.dw(m, t)] for t in range(t_count)] for m in range(net.n_farms)]
        ),
        shedding=np.array(
            [[x[idx.dd(j, t)] for t in range(t_count)] for j in range(net.n_loads)]
        ),
        objective=sol.objective,
    )
    return sol.objective, sol.duals, rec, wind


def solve_subproblem(
    cs: CompiledSubproblem,
    tol: SolveTolerances | None = None,
    node_limit: int = 200_000,
) -> SubproblemResult:
    """Solve the worst-case MILP and certify the winning vertex."""
    tol = tol or SolveTolerances()
    ms: MilpSolution = solve_milp(cs.milp, tol, node_limit)
    if ms.status not in (OPTIMAL, NODE_LIMIT) or ms.x is None:
        raise MalformedProblemError(f"worst-case MILP came back {ms.status}")
    vertex = _vertex_from_solution(cs, ms.x)
    f_inner, lam, rec, wind = _clean_resolve(
        cs.net, cs.uc, cs.prices, cs.boundary, vertex, tol
    )

    # envelope health: a dual at the envelope cap means m_big clipped it
    lam_milp = ms.x[: cs.n_rows]
    worst_lam = float(np.abs(lam_milp).max(initial=0.0))
    mismatch = abs(ms.objective - f_inner)
    if worst_lam >= 0.99 * cs.m_big or (
        ms.status == OPTIMAL and mismatch > 1e-5 * (1.0 + abs(f_inner))
    ):
        raise BigMTooSmallError(
            f"big-M envelope too tight: max |dual| {worst_lam:.3g} vs m_big "
            f"{cs.m_big:.3g}; MILP objective {ms.objective:.6g} vs inner value "
            f"{f_inner:.6g}"
        )
    resid = 0.0
    for k, (i, y, _) in enumerate(cs.d_entries):
        resid = max(resid, abs(ms.x[cs.off_gamma + k] - lam_milp[i] * ms.x[y]))

    return SubproblemResult(
        objective=f_inner,
        vertex=vertex,
        lam=lam,
        recourse=rec,
        boundary=cs.boundary,
        realized_wind=wind,
        milp_objective=ms.objective,
        milp_gap=ms.gap,
        status=ms.status,
        bilinear_residual=resid,
        nodes=ms.nodes,
    )


def oracle_subproblem(
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
    boundary: AdmissibilityBoundary,
    budgets: UncertaintyBudgets,
    cap: int = 2**20,
    tol: SolveTolerances | None = None,
) -> SubproblemResult:
    """Exhaustive worst case over every vertex of the uncertainty set.

    Ties keep the lexicographically first vertex.  Only viable when the
    vertex count is under ``cap``; exists to validate the MILP route.
    """
    tol = tol or SolveTolerances()
    fc = net.forecast()
    boundary.validate(fc, net.capacities())
    best_obj = -math.inf
    best_vertex: UncertaintyVertex | None = None
    for vertex in enumerate_vertices(net.n_farms, net.n_periods, budgets, cap):
        wind = realize_wind(vertex, boundary, fc)
        lp = assemble_recourse_lp(net, uc, prices, wind)
        sol = solve_lp(lp, tol)
        if sol.status != OPTIMAL:
            raise MalformedProblemError(f"inner recourse LP came back {sol.status}")
        if sol.objective > best_obj + 1e-12:
            best_obj = sol.objective
            best_vertex = vertex
    assert best_vertex is not None
    f_inner, lam, rec, wind = _clean_resolve(net, uc, prices, boundary, best_vertex, tol)
    return SubproblemResult(
        objective=f_inner,
        vertex=best_vertex,
        lam=lam,
        recourse=rec,
        boundary=boundary,
        realized_wind=wind,
        milp_objective=None,
        status=OPTIMAL,
    )


def check_admissibility(
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
    boundary: AdmissibilityBoundary,
    budgets: UncertaintyBudgets,
    c_loss: float = 0.0,
    m_big: float | None = None,
    tol: float = VERDICT_TOL,
    method: str = "milp",
    solve_tol: SolveTolerances | None = None,
    node_limit: int = 200_000,
) -> AdmissibilityVerdict:
    """Is the worst-case recourse cost within the tolerable loss?"""
    if c_loss < 0:
        raise MalformedProblemError("c_loss must be nonnegative")
    if method == "enumeration":
        sr = oracle_subproblem(net, uc, prices, boundary, budgets, tol=solve_tol)
    else:
        cs = compile_subproblem(net, uc, prices, boundary, budgets, m_big)
        sr = solve_subproblem(cs, solve_tol, node_limit)
    return AdmissibilityVerdict(
        admissible=sr.objective <= c_loss + tol,
        worst_cost=sr.objective,
        c_loss=c_loss,
        tol=tol,
        certificate=sr,
    )


def feasibility_cut(
    sr: SubproblemResult,
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Linear-in-boundary expression of the worst-case cost at the cut's
    vertex.  Returns (c_up, c_lo, const) such that

        const + sum(c_up * upper) + sum(c_lo * lower)

    equals ``lam . rhs(boundary, vertex)``: a valid lower bound on the
    worst-case cost of any boundary (the dual stays feasible when the
    right-hand side moves), and exactly the subproblem objective at the
    boundary the cut was generated from (strong duality).  The master
    keeps this expression below the tolerable loss.
    """
    fc = net.forecast()
    m_count, t_count = fc.shape
    rows_by_cell = wind_row_map(net)
    lam = sr.lam
    b_zero = assemble_recourse_lp(net, uc, prices, np.zeros_like(fc)).rhs
    c_up = np.zeros((m_count, t_count))
    c_lo = np.zeros((m_count, t_count))
    const = float(lam @ b_zero)
    for cell in range(m_count * t_count):
        m, t = divmod(cell, t_count)
        s_cell = sum(lam[i] * coef for i, coef in rows_by_cell[cell])
        vu, vl = float(sr.vertex.up[m, t]), float(sr.vertex.down[m, t])
        c_up[m, t] = s_cell * vu
        c_lo[m, t] = s_cell * vl
        const += s_cell * fc[m, t] * (1.0 - vu - vl)
    return c_up, c_lo, const
