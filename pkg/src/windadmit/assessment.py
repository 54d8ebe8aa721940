"""Risk-minimizing master problem and the column-and-constraint loop.

The master chooses the boundary minimizing the piecewise-linear risk plus
a penalty on the auxiliary recourse-cost bound.  Each iteration appends a
fresh recourse block pinned to the worst-case vertex just found (columns
and rows, coupled to the boundary through the realized wind) and a
feasibility cut from the inner LP's duals.  At the fixed point the
auxiliary bound sits at the tolerable loss and the objective reduces to
the risk itself.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import MalformedProblemError, StaleResultError
from .grid import Network, PriceSchedule, UcSchedule
from .lp import EQ, GE, LE, MIN, OPTIMAL, LpBuilder, SolveTolerances, solve_lp
from .risk import (
    ErrorModel,
    PlaCoefficients,
    PlaConfig,
    QuadratureConfig,
    RiskValue,
    build_pla,
    risk_exact,
    risk_pla,
)
from .subproblem import (
    SubproblemResult,
    VERDICT_TOL,
    check_admissibility,
    compile_subproblem,
    feasibility_cut,
    oracle_subproblem,
    solve_subproblem,
)
from .uncertainty import AdmissibilityBoundary, UncertaintyBudgets

CONVERGED = "converged"
STALLED = "stalled"
ITERATION_CAP = "iteration_cap"


@dataclass
class AssessmentConfig:
    c_loss: float = 0.0
    penalty: float = 100.0  # weight on the auxiliary recourse-cost bound
    epsilon: float = 1e-3  # $ stall threshold on successive master optima
    max_iterations: int = 100
    m_big: float | None = None
    feasibility_cuts: bool = True  # dropping them gives the plain block-only scheme
    verdict_tol: float = VERDICT_TOL
    pla: PlaConfig = field(default_factory=PlaConfig)
    subproblem: str = "milp"  # "milp" | "enumeration" (oracle, small cases only)
    node_limit: int = 200_000
    enumeration_cap: int = 2**20
    tolerances: SolveTolerances = field(default_factory=SolveTolerances)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def validate(self) -> None:
        if self.c_loss < 0:
            raise MalformedProblemError("c_loss must be nonnegative")
        if self.penalty < 0:
            raise MalformedProblemError("penalty must be nonnegative")
        if self.epsilon <= 0 or self.max_iterations < 1:
            raise MalformedProblemError("epsilon must be positive, iteration cap >= 1")
        if self.subproblem not in ("milp", "enumeration"):
            raise MalformedProblemError(f"unknown subproblem mode {self.subproblem!r}")


@dataclass
class IterationRecord:
    k: int
    g: float  # master optimum (risk + penalty*(eta - c_loss))
    f_r: float  # worst-case recourse cost at this iterate
    eta: float
    master_rows: int
    wall_ms: float


@dataclass
class AssessmentResult:
    boundary: AdmissibilityBoundary
    g: float  # converged master objective (equals the PLA risk at the fixed point)
    risk: RiskValue  # PLA measure at the final boundary
    risk_exact_value: RiskValue  # quadrature re-evaluation
    eta: float
    status: str
    iterations: list[IterationRecord]
    worst_cost: float  # final subproblem objective
    worst_vertex_up: np.ndarray
    worst_vertex_down: np.ndarray
    config: AssessmentConfig


class MasterState:
    """Growable master LP: boundary boxes, risk epigraph cuts, and one
    recourse block plus feasibility cut per completed iteration."""

    def __init__(
        self,
        pc: PlaCoefficients,
        net: Network,
        uc: UcSchedule,
        prices: PriceSchedule,
        c_loss: float,
        penalty: float,
        feasibility_cuts: bool = True,
        tolerances: SolveTolerances | None = None,
    ):
        self.pc = pc
        self.net = net
        self.uc = uc
        self.prices = prices
        self.c_loss = c_loss
        self.penalty = penalty
        self.feasibility_cuts = feasibility_cuts
        self.tol = tolerances or SolveTolerances()
        self.history: list[IterationRecord] = []
        self.n_blocks = 0

        fc = net.forecast()
        caps = net.capacities()
        m_count, t_count = fc.shape
        self._fc = fc
        bld = LpBuilder(MIN)
        self.i_up = np.empty((m_count, t_count), dtype=int)
        self.i_lo = np.empty((m_count, t_count), dtype=int)
        self.i_qp = np.empty((m_count, t_count), dtype=int)
        self.i_qn = np.empty((m_count, t_count), dtype=int)
        for m in range(m_count):
            for t in range(t_count):
                self.i_up[m, t] = bld.add_var(f"wu[{m},{t}]", lower=fc[m, t], upper=caps[m])
                self.i_lo[m, t] = bld.add_var(f"wl[{m},{t}]", lower=0.0, upper=fc[m, t])
        for m in range(m_count):
            for t in range(t_count):
                self.i_qp[m, t] = bld.add_var(f"qp[{m},{t}]", lower=0.0, obj=1.0)
                self.i_qn[m, t] = bld.add_var(f"qn[{m},{t}]", lower=0.0, obj=1.0)
        self.i_eta = bld.add_var("eta", lower=c_loss, obj=penalty)
        k = pc.a_p.shape[2]
        for m in range(m_count):
            for t in range(t_count):
                for i in range(k):
                    bld.add_row(
                        [(int(self.i_qp[m, t]), 1.0), (int(self.i_up[m, t]), -float(pc.a_p[m, t, i]))],
                        GE, float(pc.b_p[m, t, i]), f"cut_p[{m},{t},{i}]",
                    )
                    bld.add_row(
                        [(int(self.i_qn[m, t]), 1.0), (int(self.i_lo[m, t]), -float(pc.a_n[m, t, i]))],
                        GE, float(pc.b_n[m, t, i]), f"cut_n[{m},{t},{i}]",
                    )
        self._bld = bld

    @property
    def n_rows(self) -> int:
        return self._bld.n_rows

    def solve(self) -> tuple[AdmissibilityBoundary, float, float, object]:
        """Solve the current master; returns (boundary, G, eta, solution)."""
        lp = self._bld.build()
        sol = solve_lp(lp, self.tol)
        if sol.status != OPTIMAL:
            raise MalformedProblemError(f"master LP came back {sol.status}")
        up = np.array([[sol.x[self.i_up[m, t]] for t in range(self._fc.shape[1])]
                       for m in range(self._fc.shape[0])])
        lo = np.array([[sol.x[self.i_lo[m, t]] for t in range(self._fc.shape[1])]
                       for m in range(self._fc.shape[0])])
        boundary = AdmissibilityBoundary(lower=lo, upper=up)
        eta = float(sol.x[self.i_eta])
        g = float(sol.objective - self.penalty * self.c_loss)
        return boundary, g, eta, sol

    def add_iteration(self, sr: SubproblemResult, at_boundary: AdmissibilityBoundary) -> None:
        """Append the recourse block and feasibility cut for a solved vertex.

        The block is written compactly (equality balance rows, variable
        limits as bounds) since it never gets dualized; its wind-bearing
        rows couple to the boundary variables through the vertex's
        deviation indicators.
        """
        if not (
            np.allclose(sr.boundary.upper, at_boundary.upper, atol=1e-9)
            and np.allclose(sr.boundary.lower, at_boundary.lower, atol=1e-9)
        ):
            raise StaleResultError(
                "subproblem result was solved at a different boundary than supplied"
            )
        bld = self._bld
        net = self.net
        k = self.n_blocks
        fc = self._fc
        t_count = fc.shape[1]
        on = self.uc.on.astype(float)

        p = np.empty((net.n_gens, t_count), dtype=int)
        for g, gen in enumerate(net.generators):
            for t in range(t_count):
                p[g, t] = bld.add_var(f"p[{g},{t}]#{k}", lower=on[g, t] * gen.pmin,
                                      upper=on[g, t] * gen.pmax)
        theta = np.empty((net.n_nodes, t_count), dtype=int)
        for n in range(net.n_nodes):
            for t in range(t_count):
                if n == net.ref_node:
                    theta[n, t] = bld.add_var(f"th[{n},{t}]#{k}", lower=0.0, upper=0.0)
                else:
                    theta[n, t] = bld.add_var(f"th[{n},{t}]#{k}", lower=-math.pi,
                                              upper=math.pi)
        dw = np.empty((net.n_farms, t_count), dtype=int)
        for m in range(net.n_farms):
            for t in range(t_count):
                dw[m, t] = bld.add_var(f"dw[{m},{t}]#{k}", lower=0.0)
        dd = np.empty((net.n_loads, t_count), dtype=int)
        for j, load in enumerate(net.loads):
            for t in range(t_count):
                dd[j, t] = bld.add_var(f"dD[{j},{t}]#{k}", lower=0.0,
                                       upper=float(load.demand[t]))

        for g, gen in enumerate(net.generators):
            for t in range(t_count - 1):
                rhs = on[g, t + 1] * gen.ramp_dn + (1.0 - on[g, t + 1]) * gen.pmax
                bld.add_row([(int(p[g, t]), 1.0), (int(p[g, t + 1]), -1.0)], LE, rhs,
                            f"blk{k}_rdn[{g},{t}]")
                rhs = on[g, t] * gen.ramp_up + (1.0 - on[g, t]) * gen.pmax
                bld.add_row([(int(p[g, t + 1]), 1.0), (int(p[g, t]), -1.0)], LE, rhs,
                            f"blk{k}_rup[{g},{t}]")
        for l, line in enumerate(net.lines):
            beta = net.base_mva * line.susceptance_pu
            for t in range(t_count):
                terms = [(int(theta[line.from_bus, t]), beta),
                         (int(theta[line.to_bus, t]), -beta)]
                bld.add_row(terms, LE, line.capacity_mw, f"blk{k}_fhi[{l},{t}]")
                terms = [(int(theta[line.from_bus, t]), -beta),
                         (int(theta[line.to_bus, t]), beta)]
                bld.add_row(terms, LE, line.capacity_mw, f"blk{k}_flo[{l},{t}]")

        # realized wind at the block's vertex, affine in the boundary:
        # forecast*(1-vu-vl) enters the rhs; vu/vl couple wu/wl columns
        gens_at = [[] for _ in range(net.n_nodes)]
        for g, gen in enumerate(net.generators):
            gens_at[gen.bus].append(g)
        farms_at = [[] for _ in range(net.n_nodes)]
        for m, farm in enumerate(net.wind_farms):
            farms_at[farm.bus].append(m)
        loads_at = [[] for _ in range(net.n_nodes)]
        for j, load in enumerate(net.loads):
            loads_at[load.bus].append(j)
        lines_at = [[] for _ in range(net.n_nodes)]
        for line in net.lines:
            beta = net.base_mva * line.susceptance_pu
            lines_at[line.from_bus].append((line.from_bus, line.to_bus, beta))
            lines_at[line.to_bus].append((line.to_bus, line.from_bus, beta))
        for n in range(net.n_nodes):
            for t in range(t_count):
                terms: list[tuple[int, float]] = []
                rhs = 0.0
                for g in gens_at[n]:
                    terms.append((int(p[g, t]), 1.0))
                for j in loads_at[n]:
                    terms.append((int(dd[j, t]), 1.0))
                    rhs += float(net.loads[j].demand[t])
                for here, other, beta in lines_at[n]:
                    terms.append((int(theta[here, t]), -beta))
                    terms.append((int(theta[other, t]), beta))
                for m in farms_at[n]:
                    vu = float(sr.vertex.up[m, t])
                    vl = float(sr.vertex.down[m, t])
                    terms.append((int(dw[m, t]), -1.0))
                    rhs -= fc[m, t] * (1.0 - vu - vl)
                    if vu:
                        terms.append((int(self.i_up[m, t]), vu))
                    if vl:
                        terms.append((int(self.i_lo[m, t]), vl))
                bld.add_row(terms, EQ, rhs, f"blk{k}_bal[{n},{t}]")

        for m in range(net.n_farms):
            for t in range(t_count):
                vu = float(sr.vertex.up[m, t])
                vl = float(sr.vertex.down[m, t])
                terms = [(int(dw[m, t]), 1.0)]
                if vu:
                    terms.append((int(self.i_up[m, t]), -vu))
                if vl:
                    terms.append((int(self.i_lo[m, t]), -vl))
                bld.add_row(terms, LE, fc[m, t] * (1.0 - vu - vl),
                            f"blk{k}_curt[{m},{t}]")

        # recourse cost of this block stays below the auxiliary bound
        cost_terms = []
        for m in range(net.n_farms):
            for t in range(t_count):
                cost_terms.append((int(dw[m, t]), float(self.prices.curtail[m, t])))
        for j in range(net.n_loads):
            for t in range(t_count):
                cost_terms.append((int(dd[j, t]), float(self.prices.shed[j, t])))
        cost_terms.append((self.i_eta, -1.0))
        bld.add_row(cost_terms, LE, 0.0, f"blk{k}_cost")

        if self.feasibility_cuts:
            c_up, c_lo, const = feasibility_cut(sr, net, self.uc, self.prices)
            terms = []
            m_count = fc.shape[0]
            for m in range(m_count):
                for t in range(t_count):
                    if c_up[m, t] != 0.0:
                        terms.append((int(self.i_up[m, t]), float(c_up[m, t])))
                    if c_lo[m, t] != 0.0:
                        terms.append((int(self.i_lo[m, t]), float(c_lo[m, t])))
            if terms:  # all-zero vertex yields a constant-only, vacuous cut
                bld.add_row(terms, LE, float(self.c_loss - const), f"feascut{k}")
        self.n_blocks += 1


def init_master(
    pc: PlaCoefficients,
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
    c_loss: float,
    penalty: float,
    feasibility_cuts: bool = True,
    tolerances: SolveTolerances | None = None,
) -> MasterState:
    """Master with boundary boxes, risk cuts, and the penalty variable only."""
    return MasterState(pc, net, uc, prices, c_loss, penalty, feasibility_cuts, tolerances)


def run_assessment(
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
    em: ErrorModel,
    budgets: UncertaintyBudgets,
    cfg: AssessmentConfig | None = None,
) -> AssessmentResult:
    """Alternate master and worst-case subproblem until the boundary is
    certifiably admissible (worst-case cost within the tolerable loss).

    Master optima are non-decreasing since the feasible set only shrinks;
    the loop also honors the stall threshold ``epsilon`` once the iterate
    is admissible.
    """
    cfg = cfg or AssessmentConfig()
    cfg.validate()
    uc.validate(net)
    pc = build_pla(em, cfg.pla, prices)
    ms = init_master(pc, net, uc, prices, cfg.c_loss, cfg.penalty,
                     cfg.feasibility_cuts, cfg.tolerances)
    g_prev = math.inf
    status = ITERATION_CAP
    boundary = None
    sr = None
    g = math.nan
    eta = math.nan
    for k in range(1, cfg.max_iterations + 1):
        t0 = time.perf_counter()
        boundary, g, eta, _ = ms.solve()
        if ms.history and g < ms.history[-1].g - 1e-6 * (1.0 + abs(g)):
            raise MalformedProblemError(
                f"master optimum decreased at iteration {k}: {ms.history[-1].g} -> {g}"
            )
        if cfg.subproblem == "enumeration":
            sr = oracle_subproblem(net, uc, prices, boundary, budgets,
                                   cfg.enumeration_cap, cfg.tolerances)
        else:
            cs = compile_subproblem(net, uc, prices, boundary, budgets, cfg.m_big)
            sr = solve_subproblem(cs, cfg.tolerances, cfg.node_limit)
        wall = (time.perf_counter() - t0) * 1000.0
        ms.history.append(IterationRecord(k=k, g=g, f_r=sr.objective, eta=eta,
                                          master_rows=ms.n_rows, wall_ms=wall))
        if sr.objective <= cfg.c_loss + cfg.verdict_tol:
            status = CONVERGED
            break
        if (
            not cfg.feasibility_cuts
            and abs(g - g_prev) < cfg.epsilon
            and k > 1
        ):
            # block-only mode can stall at its fixed point without reaching
            # admissibility; report it rather than loop to the cap
            status = STALLED
            break
        ms.add_iteration(sr, boundary)
        g_prev = g

    assert boundary is not None and sr is not None
    pla_value = risk_pla(boundary, pc)
    if status == CONVERGED and abs(pla_value.total - g) > 1e-6 * (1.0 + abs(g)):
        raise MalformedProblemError(
            f"converged master objective {g} does not match PLA risk {pla_value.total}"
        )
    exact_value = risk_exact(boundary, em, prices, cfg.quadrature)
    return AssessmentResult(
        boundary=boundary,
        g=g,
        risk=pla_value,
        risk_exact_value=exact_value,
        eta=eta,
        status=status,
        iterations=ms.history,
        worst_cost=sr.objective,
        worst_vertex_up=sr.vertex.up.copy(),
        worst_vertex_down=sr.vertex.down.copy(),
        config=cfg,
    )
