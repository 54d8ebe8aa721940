"""Deterministic unit commitment with a spinning-reserve-rate constraint.

A convenience baseline generator: least-cost dispatch of the forecast
scenario with committed-capacity headroom of at least the reserve rate
times demand in every period.  Commitment carries no startup or no-load
cost (none are part of the case data), so schedules are tie-broken by the
solver's deterministic search; the returned schedule is always audited
against the reserve rows and forecast feasibility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ScucInfeasibleError
from .grid import Network, PriceSchedule, UcSchedule, evaluate_scenario
from .lp import EQ, GE, LE, MIN, NODE_LIMIT, OPTIMAL, LpBuilder, SolveTolerances, solve_milp


@dataclass(frozen=True)
class ScucConfig:
    reserve_rate: float = 0.05
    node_limit: int = 200_000

    def __post_init__(self):
        if self.reserve_rate < 0:
            raise ScucInfeasibleError("reserve rate must be nonnegative")


def solve_scuc(
    net: Network,
    prices: PriceSchedule,
    cfg: ScucConfig,
    tol: SolveTolerances | None = None,
) -> UcSchedule:
    """Commit units for the forecast scenario at the configured reserve rate."""
    t_count = net.n_periods
    fc = net.forecast()
    demand_total = net.demand().sum(axis=0)
    bld = LpBuilder(MIN)

    u = np.empty((net.n_gens, t_count), dtype=int)
    p = np.empty((net.n_gens, t_count), dtype=int)
    for g, gen in enumerate(net.generators):
        for t in range(t_count):
            u[g, t] = bld.add_var(f"u[{g},{t}]", lower=0.0, upper=1.0, integer=True)
            p[g, t] = bld.add_var(f"p[{g},{t}]", lower=0.0, obj=gen.cost)
    theta = np.empty((net.n_nodes, t_count), dtype=int)
    for n in range(net.n_nodes):
        for t in range(t_count):
            if n == net.ref_node:
                theta[n, t] = bld.add_var(f"th[{n},{t}]", lower=0.0, upper=0.0)
            else:
                theta[n, t] = bld.add_var(f"th[{n},{t}]", lower=-math.pi, upper=math.pi)

    for g, gen in enumerate(net.generators):
        for t in range(t_count):
            bld.add_row([(int(p[g, t]), 1.0), (int(u[g, t]), -gen.pmax)], LE, 0.0,
                        f"cap_hi[{g},{t}]")
            bld.add_row([(int(p[g, t]), -1.0), (int(u[g, t]), gen.pmin)], LE, 0.0,
                        f"cap_lo[{g},{t}]")
        for t in range(t_count - 1):
            bld.add_row(
                [(int(p[g, t]), 1.0), (int(p[g, t + 1]), -1.0),
                 (int(u[g, t + 1]), gen.pmax - gen.ramp_dn)],
                LE, gen.pmax, f"ramp_dn[{g},{t}]",
            )
            bld.add_row(
                [(int(p[g, t + 1]), 1.0), (int(p[g, t]), -1.0),
                 (int(u[g, t]), gen.pmax - gen.ramp_up)],
                LE, gen.pmax, f"ramp_up[{g},{t}]",
            )
    for line in net.lines:
        beta = net.base_mva * line.susceptance_pu
        for t in range(t_count):
            bld.add_row([(int(theta[line.from_bus, t]), beta),
                         (int(theta[line.to_bus, t]), -beta)], LE, line.capacity_mw)
            bld.add_row([(int(theta[line.from_bus, t]), -beta),
                         (int(theta[line.to_bus, t]), beta)], LE, line.capacity_mw)

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
            terms = [(int(p[g, t]), 1.0) for g in gens_at[n]]
            for here, other, beta in lines_at[n]:
                terms.append((int(theta[here, t]), -beta))
                terms.append((int(theta[other, t]), beta))
            rhs = sum(net.loads[j].demand[t] for j in loads_at[n]) - sum(
                fc[m, t] for m in farms_at[n]
            )
            bld.add_row(terms, EQ, float(rhs), f"bal[{n},{t}]")

    for t in range(t_count):
        terms = [(int(u[g, t]), gen.pmax) for g, gen in enumerate(net.generators)]
        terms += [(int(p[g, t]), -1.0) for g in range(net.n_gens)]
        bld.add_row(terms, GE, cfg.reserve_rate * float(demand_total[t]), f"reserve[{t}]")

    milp = bld.build_milp()
    ms = solve_milp(milp, tol, cfg.node_limit)
    if ms.status not in (OPTIMAL, NODE_LIMIT) or ms.x is None:
        raise ScucInfeasibleError(
            f"unit commitment {ms.status}: committed capacity cannot cover "
            f"load plus reserve at rate {cfg.reserve_rate}"
        )
    on = np.rint(ms.x[[int(u[g, t]) for g in range(net.n_gens) for t in range(t_count)]])
    schedule = UcSchedule(
        on=on.reshape(net.n_gens, t_count).astype(np.int8),
        reserve_rate=cfg.reserve_rate,
    )
    audit_schedule(net, prices, schedule, cfg.reserve_rate)
    return schedule


def audit_schedule(
    net: Network, prices: PriceSchedule, uc: UcSchedule, reserve_rate: float
) -> None:
    """Post-solve audit: reserve headroom in every period and a shed-free
    dispatch of the forecast scenario."""
    sol = evaluate_scenario(net, uc, prices, net.forecast())
    if sol.objective > 1e-5:
        raise ScucInfeasibleError(
            f"schedule cannot absorb the forecast scenario (residual cost {sol.objective:.4g})"
        )
    demand_total = net.demand().sum(axis=0)
    committed = uc.on.astype(float).T @ np.array([g.pmax for g in net.generators])
    headroom = committed - sol.p.sum(axis=0)
    need = reserve_rate * demand_total
    worst = float((headroom - need).min())
    if worst < -1e-6:
        raise ScucInfeasibleError(f"reserve short by {-worst:.4g} MW in some period")
