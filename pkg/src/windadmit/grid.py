"""Grid data model, case parsing, and the recourse dispatch LP.

The recourse LP minimizes priced wind curtailment plus load shedding for a
fixed wind realization, subject to generator capacity and ramp limits, DC
power flow, and relaxed nodal balance.

Canonical encoding
------------------
The LP is written with every constraint as a ``<=`` row over nonnegative
variables so that its dual has the uniform sign structure the worst-case
subproblem needs: phase angles are shifted by ``+pi`` (reported solutions
shift back), equalities appear as row pairs, and all variable upper limits
are rows.  Row/column tallies for a case with G generators, N nodes,
L lines, M wind farms, J loads and T periods:

* columns: ``(G + N + M + J) * T``
* rows:    ``2*G*T + 2*G*(T-1) + 2*L*T + 3*N*T + 2*T + J*T + M*T``

Bus numbering in case files is 1-based; everything in memory is 0-based.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    CaseSchemaError,
    DanglingReferenceError,
    DimensionMismatchError,
    MalformedProblemError,
)
from .lp import LE, MIN, OPTIMAL, LinearProgram, LpBuilder, SolveTolerances, solve_lp


@dataclass(frozen=True)
class Generator:
    bus: int
    pmin: float
    pmax: float
    ramp_up: float
    ramp_dn: float
    cost: float


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    susceptance_pu: float
    capacity_mw: float


@dataclass(frozen=True)
class Load:
    bus: int
    demand: np.ndarray  # (T,)


@dataclass(frozen=True)
class WindFarm:
    bus: int
    capacity_mw: float
    forecast: np.ndarray  # (T,)


@dataclass(frozen=True)
class Network:
    n_nodes: int
    ref_node: int
    base_mva: float
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    loads: tuple[Load, ...]
    wind_farms: tuple[WindFarm, ...]
    n_periods: int

    @property
    def n_gens(self) -> int:
        return len(self.generators)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def n_loads(self) -> int:
        return len(self.loads)

    @property
    def n_farms(self) -> int:
        return len(self.wind_farms)

    def forecast(self) -> np.ndarray:
        return np.array([w.forecast for w in self.wind_farms])

    def capacities(self) -> np.ndarray:
        return np.array([w.capacity_mw for w in self.wind_farms])

    def demand(self) -> np.ndarray:
        return np.array([d.demand for d in self.loads])


@dataclass
class PriceSchedule:
    """Curtailment, shedding, and emergency-regulation prices ($/MWh)."""

    curtail: np.ndarray  # (M, T)
    shed: np.ndarray  # (J, T)
    reg_up: np.ndarray  # (T,)
    reg_dn: np.ndarray  # (T,)

    def validate(self) -> None:
        for name, arr in (("curtail", self.curtail), ("shed", self.shed),
                          ("reg_up", self.reg_up), ("reg_dn", self.reg_dn)):
            if np.any(np.asarray(arr) < 0):
                raise CaseSchemaError(f"prices.{name} must be nonnegative")


@dataclass
class UcSchedule:
    """Fixed binary commitment, shape (G, T); 1 = unit on."""

    on: np.ndarray
    reserve_rate: float | None = None

    def validate(self, net: Network) -> None:
        if self.on.shape != (net.n_gens, net.n_periods):
            raise DimensionMismatchError(
                f"UC schedule shape {self.on.shape} does not match "
                f"(G={net.n_gens}, T={net.n_periods})"
            )
        if not np.all((self.on == 0) | (self.on == 1)):
            raise MalformedProblemError("UC entries must be 0/1")

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["period", "generator", "on"])
            g_count, t_count = self.on.shape
            for t in range(t_count):
                for g in range(g_count):
                    writer.writerow([t + 1, g + 1, int(self.on[g, t])])

    @staticmethod
    def read_csv(path: str | Path, net: Network) -> "UcSchedule":
        on = np.zeros((net.n_gens, net.n_periods), dtype=np.int8)
        seen = np.zeros_like(on, dtype=bool)
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"period", "generator", "on"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise CaseSchemaError(
                    f"UC CSV must have header period,generator,on (got {reader.fieldnames})"
                )
            for row in reader:
                t = int(row["period"]) - 1
                g = int(row["generator"]) - 1
                if not (0 <= t < net.n_periods and 0 <= g < net.n_gens):
                    raise DanglingReferenceError(
                        f"UC row references period {t + 1}, generator {g + 1}"
                    )
                on[g, t] = int(row["on"])
                seen[g, t] = True
        if not seen.all():
            raise DimensionMismatchError("UC CSV does not cover every (generator, period)")
        uc = UcSchedule(on=on)
        uc.validate(net)
        return uc


@dataclass
class RecourseSolution:
    p: np.ndarray  # (G, T) MW
    theta: np.ndarray  # (N, T) rad, reference angle 0
    curtailment: np.ndarray  # (M, T) MW
    shedding: np.ndarray  # (J, T) MW
    objective: float  # $


# ---------------------------------------------------------------------------
# case parsing


def _require(doc: dict, key: str, ctx: str = "case") -> object:
    if key not in doc:
        raise CaseSchemaError(f"{ctx} is missing required field {key!r}")
    return doc[key]


def _series(value: object, n_periods: int, name: str) -> np.ndarray:
    """Accept a scalar (broadcast) or a length-T list for a price/demand series."""
    if isinstance(value, (int, float)):
        return np.full(n_periods, float(value))
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n_periods,):
        raise DimensionMismatchError(f"{name} has length {arr.size}, expected {n_periods}")
    return arr


def load_case(source: str | Path | dict) -> tuple[Network, PriceSchedule]:
    """Parse a case document (path or already-decoded dict).

    Validates every structural invariant and names the offending field in
    error messages.  Buses in the file are numbered 1..nodes.
    """
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            doc = json.load(fh)
    else:
        doc = source

    n_nodes = int(_require(doc, "nodes"))
    if n_nodes <= 0:
        raise CaseSchemaError("nodes must be positive")
    base_mva = float(_require(doc, "base_mva"))
    if base_mva <= 0:
        raise CaseSchemaError("base_mva must be positive")
    ref_1b = int(_require(doc, "ref_node"))
    if not 1 <= ref_1b <= n_nodes:
        raise DanglingReferenceError(f"ref_node {ref_1b} not in 1..{n_nodes}")

    def bus_index(raw: object, ctx: str) -> int:
        b = int(raw)
        if not 1 <= b <= n_nodes:
            raise DanglingReferenceError(f"{ctx} references bus {b}, valid range 1..{n_nodes}")
        return b - 1

    lines = []
    for i, entry in enumerate(_require(doc, "lines")):
        cap = float(_require(entry, "capacity_mw", f"lines[{i}]"))
        if cap <= 0:
            raise CaseSchemaError(f"lines[{i}].capacity_mw must be positive")
        lines.append(
            Line(
                from_bus=bus_index(_require(entry, "from", f"lines[{i}]"), f"lines[{i}].from"),
                to_bus=bus_index(_require(entry, "to", f"lines[{i}]"), f"lines[{i}].to"),
                susceptance_pu=float(_require(entry, "susceptance_pu", f"lines[{i}]")),
                capacity_mw=cap,
            )
        )

    gens = []
    for i, entry in enumerate(_require(doc, "generators")):
        pmin = float(_require(entry, "pmin_mw", f"generators[{i}]"))
        pmax = float(_require(entry, "pmax_mw", f"generators[{i}]"))
        if pmin > pmax:
            raise CaseSchemaError(f"generators[{i}] has pmin_mw > pmax_mw")
        if pmin < 0:
            raise CaseSchemaError(f"generators[{i}].pmin_mw must be nonnegative")
        gens.append(
            Generator(
                bus=bus_index(_require(entry, "bus", f"generators[{i}]"), f"generators[{i}].bus"),
                pmin=pmin,
                pmax=pmax,
                ramp_up=float(_require(entry, "ramp_up_mw", f"generators[{i}]")),
                ramp_dn=float(_require(entry, "ramp_dn_mw", f"generators[{i}]")),
                cost=float(_require(entry, "cost_per_mwh", f"generators[{i}]")),
            )
        )

    load_entries = list(_require(doc, "loads"))
    if not load_entries:
        raise CaseSchemaError("case must declare at least one load")
    t_count = len(np.atleast_1d(np.asarray(load_entries[0]["demand_mw"], dtype=float)))
    loads = []
    for i, entry in enumerate(load_entries):
        demand = _series(_require(entry, "demand_mw", f"loads[{i}]"), t_count,
                         f"loads[{i}].demand_mw")
        if np.any(demand < 0):
            raise CaseSchemaError(f"loads[{i}].demand_mw must be nonnegative")
        loads.append(
            Load(bus=bus_index(_require(entry, "bus", f"loads[{i}]"), f"loads[{i}].bus"),
                 demand=demand)
        )

    farms = []
    for i, entry in enumerate(_require(doc, "wind_farms")):
        cap = float(_require(entry, "capacity_mw", f"wind_farms[{i}]"))
        if cap <= 0:
            raise CaseSchemaError(f"wind_farms[{i}].capacity_mw must be positive")
        forecast = _series(_require(entry, "forecast_mw", f"wind_farms[{i}]"), t_count,
                           f"wind_farms[{i}].forecast_mw")
        if np.any(forecast < 0) or np.any(forecast > cap + 1e-9):
            raise CaseSchemaError(f"wind_farms[{i}].forecast_mw must lie in [0, capacity_mw]")
        farms.append(
            WindFarm(bus=bus_index(_require(entry, "bus", f"wind_farms[{i}]"),
                                   f"wind_farms[{i}].bus"),
                     capacity_mw=cap, forecast=forecast)
        )

    prices_doc = _require(doc, "prices")
    curtail_raw = _require(prices_doc, "curtail", "prices")
    shed_raw = _require(prices_doc, "shed", "prices")
    if len(curtail_raw) != len(farms):
        raise DimensionMismatchError("prices.curtail needs one entry per wind farm")
    if len(shed_raw) != len(loads):
        raise DimensionMismatchError("prices.shed needs one entry per load")
    prices = PriceSchedule(
        curtail=np.array([_series(v, t_count, f"prices.curtail[{i}]")
                          for i, v in enumerate(curtail_raw)]),
        shed=np.array([_series(v, t_count, f"prices.shed[{i}]")
                       for i, v in enumerate(shed_raw)]),
        reg_up=_series(_require(prices_doc, "reg_up", "prices"), t_count, "prices.reg_up"),
        reg_dn=_series(_require(prices_doc, "reg_dn", "prices"), t_count, "prices.reg_dn"),
    )
    prices.validate()

    net = Network(
        n_nodes=n_nodes,
        ref_node=ref_1b - 1,
        base_mva=base_mva,
        generators=tuple(gens),
        lines=tuple(lines),
        loads=tuple(loads),
        wind_farms=tuple(farms),
        n_periods=t_count,
    )
    return net, prices


def dump_case(net: Network, prices: PriceSchedule) -> dict:
    """Inverse of :func:`load_case`; emits the normative schema (1-based buses)."""
    return {
        "base_mva": net.base_mva,
        "nodes": net.n_nodes,
        "ref_node": net.ref_node + 1,
        "lines": [
            {"from": l.from_bus + 1, "to": l.to_bus + 1,
             "susceptance_pu": l.susceptance_pu, "capacity_mw": l.capacity_mw}
            for l in net.lines
        ],
        "generators": [
            {"bus": g.bus + 1, "pmin_mw": g.pmin, "pmax_mw": g.pmax,
             "ramp_up_mw": g.ramp_up, "ramp_dn_mw": g.ramp_dn, "cost_per_mwh": g.cost}
            for g in net.generators
        ],
        "loads": [{"bus": d.bus + 1, "demand_mw": d.demand.tolist()} for d in net.loads],
        "wind_farms": [
            {"bus": w.bus + 1, "capacity_mw": w.capacity_mw, "forecast_mw": w.forecast.tolist()}
            for w in net.wind_farms
        ],
        "prices": {
            "curtail": [row.tolist() for row in prices.curtail],
            "shed": [row.tolist() for row in prices.shed],
            "reg_up": prices.reg_up.tolist(),
            "reg_dn": prices.reg_dn.tolist(),
        },
    }


def slice_horizon(
    net: Network, prices: PriceSchedule, uc: UcSchedule | None, t_keep: int
) -> tuple[Network, PriceSchedule, UcSchedule | None]:
    """Restrict everything to the first ``t_keep`` periods (reduced instances)."""
    if not 1 <= t_keep <= net.n_periods:
        raise DimensionMismatchError(f"cannot keep {t_keep} of {net.n_periods} periods")
    net2 = Network(
        n_nodes=net.n_nodes,
        ref_node=net.ref_node,
        base_mva=net.base_mva,
        generators=net.generators,
        lines=net.lines,
        loads=tuple(Load(d.bus, d.demand[:t_keep]) for d in net.loads),
        wind_farms=tuple(
            WindFarm(w.bus, w.capacity_mw, w.forecast[:t_keep]) for w in net.wind_farms
        ),
        n_periods=t_keep,
    )
    prices2 = PriceSchedule(
        curtail=prices.curtail[:, :t_keep],
        shed=prices.shed[:, :t_keep],
        reg_up=prices.reg_up[:t_keep],
        reg_dn=prices.reg_dn[:t_keep],
    )
    uc2 = None if uc is None else UcSchedule(on=uc.on[:, :t_keep], reserve_rate=uc.reserve_rate)
    return net2, prices2, uc2


# ---------------------------------------------------------------------------
# canonical recourse LP


class RecourseIndex:
    """Variable and row offsets of the canonical recourse LP."""

    def __init__(self, net: Network):
        g, n, m, j, t = net.n_gens, net.n_nodes, net.n_farms, net.n_loads, net.n_periods
        lcount = net.n_lines
        self.t = t
        self.off_p = 0
        self.off_theta = g * t
        self.off_dw = self.off_theta + n * t
        self.off_dd = self.off_dw + m * t
        self.n_cols = self.off_dd + j * t
        # row blocks, in construction order
        self.row_cap_hi = 0
        self.row_cap_lo = self.row_cap_hi + g * t
        self.row_ramp_dn = self.row_cap_lo + g * t
        self.row_ramp_up = self.row_ramp_dn + g * (t - 1)
        self.row_flow_hi = self.row_ramp_up + g * (t - 1)
        self.row_flow_lo = self.row_flow_hi + lcount * t
        self.row_ang_hi = self.row_flow_lo + lcount * t
        self.row_ref_hi = self.row_ang_hi + n * t
        self.row_ref_lo = self.row_ref_hi + t
        self.row_bal_hi = self.row_ref_lo + t
        self.row_bal_lo = self.row_bal_hi + n * t
        self.row_shed_hi = self.row_bal_lo + n * t
        self.row_curtail_hi = self.row_shed_hi + j * t
        self.n_rows = self.row_curtail_hi + m * t

    def p(self, g: int, t: int) -> int:
        return self.off_p + g * self.t + t

    def theta(self, n: int, t: int) -> int:
        return self.off_theta + n * self.t + t

    def dw(self, m: int, t: int) -> int:
        return self.off_dw + m * self.t + t

    def dd(self, j: int, t: int) -> int:
        return self.off_dd + j * self.t + t

    def bal_hi(self, n: int, t: int) -> int:
        return self.row_bal_hi + n * self.t + t

    def bal_lo(self, n: int, t: int) -> int:
        return self.row_bal_lo + n * self.t + t

    def curtail(self, m: int, t: int) -> int:
        return self.row_curtail_hi + m * self.t + t


def recourse_tally(net: Network) -> tuple[int, int]:
    """(rows, columns) of the canonical recourse LP, in closed form."""
    g, n, m, j, t = net.n_gens, net.n_nodes, net.n_farms, net.n_loads, net.n_periods
    lcount = net.n_lines
    rows = 2 * g * t + 2 * g * (t - 1) + 2 * lcount * t + 3 * n * t + 2 * t + j * t + m * t
    cols = (g + n + m + j) * t
    return rows, cols


def wind_row_map(net: Network) -> list[list[tuple[int, float]]]:
    """For each flattened (farm, period) cell, the rows whose right-hand side
    carries the realized wind and the coefficient it enters with."""
    idx = RecourseIndex(net)
    out = []
    for m, farm in enumerate(net.wind_farms):
        for t in range(net.n_periods):
            out.append([
                (idx.bal_hi(farm.bus, t), -1.0),
                (idx.bal_lo(farm.bus, t), +1.0),
                (idx.curtail(m, t), +1.0),
            ])
    return out


def assemble_recourse_lp(
    net: Network, uc: UcSchedule, prices: PriceSchedule, wind: np.ndarray
) -> LinearProgram:
    """Build the recourse dispatch LP for a concrete wind realization (MW).

    The construction follows the canonical encoding documented in the
    module docstring; :func:`recourse_tally` gives its row/column counts.
    """
    uc.validate(net)
    wind = np.asarray(wind, dtype=float)
    fc = net.forecast()
    if wind.shape != fc.shape:
        raise DimensionMismatchError(
            f"wind realization shape {wind.shape} does not match (M, T)={fc.shape}"
        )
    caps = net.capacities()
    if np.any(wind < -1e-9) or np.any(wind > caps[:, None] + 1e-9):
        raise MalformedProblemError("wind realization outside [0, capacity]")

    t_count = net.n_periods
    idx = RecourseIndex(net)
    b = LpBuilder(MIN)

    for g in range(net.n_gens):
        for t in range(t_count):
            b.add_var(f"p[{g},{t}]")
    for n in range(net.n_nodes):
        for t in range(t_count):
            b.add_var(f"theta[{n},{t}]")  # shifted angle, theta + pi
    for m in range(net.n_farms):
        for t in range(t_count):
            b.add_var(f"dw[{m},{t}]", obj=float(prices.curtail[m, t]))
    for j in range(net.n_loads):
        for t in range(t_count):
            b.add_var(f"dD[{j},{t}]", obj=float(prices.shed[j, t]))

    on = uc.on.astype(float)
    for g, gen in enumerate(net.generators):
        for t in range(t_count):
            b.add_row([(idx.p(g, t), 1.0)], LE, on[g, t] * gen.pmax, f"cap_hi[{g},{t}]")
    for g, gen in enumerate(net.generators):
        for t in range(t_count):
            b.add_row([(idx.p(g, t), -1.0)], LE, -on[g, t] * gen.pmin, f"cap_lo[{g},{t}]")
    for g, gen in enumerate(net.generators):
        for t in range(t_count - 1):
            rhs = on[g, t + 1] * gen.ramp_dn + (1.0 - on[g, t + 1]) * gen.pmax
            b.add_row([(idx.p(g, t), 1.0), (idx.p(g, t + 1), -1.0)], LE, rhs,
                      f"ramp_dn[{g},{t}]")
    for g, gen in enumerate(net.generators):
        for t in range(t_count - 1):
            rhs = on[g, t] * gen.ramp_up + (1.0 - on[g, t]) * gen.pmax
            b.add_row([(idx.p(g, t + 1), 1.0), (idx.p(g, t), -1.0)], LE, rhs,
                      f"ramp_up[{g},{t}]")
    for sign, tag in ((1.0, "flow_hi"), (-1.0, "flow_lo")):
        for l, line in enumerate(net.lines):
            beta = net.base_mva * line.susceptance_pu
            for t in range(t_count):
                b.add_row(
                    [(idx.theta(line.from_bus, t), sign * beta),
                     (idx.theta(line.to_bus, t), -sign * beta)],
                    LE, line.capacity_mw, f"{tag}[{l},{t}]",
                )
    for n in range(net.n_nodes):
        for t in range(t_count):
            b.add_row([(idx.theta(n, t), 1.0)], LE, 2.0 * math.pi, f"ang_hi[{n},{t}]")
    for t in range(t_count):
        b.add_row([(idx.theta(net.ref_node, t), 1.0)], LE, math.pi, f"ref_hi[{t}]")
    for t in range(t_count):
        b.add_row([(idx.theta(net.ref_node, t), -1.0)], LE, -math.pi, f"ref_lo[{t}]")

    # nodal balance: generation + wind - shed-adjusted demand - outflow = 0,
    # written as a <= row pair; wind enters the right-hand side
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

    def balance_terms(n: int, t: int, sign: float) -> list[tuple[int, float]]:
        terms: list[tuple[int, float]] = []
        for g in gens_at[n]:
            terms.append((idx.p(g, t), sign))
        for m in farms_at[n]:
            terms.append((idx.dw(m, t), -sign))
        for j in loads_at[n]:
            terms.append((idx.dd(j, t), sign))
        for here, other, beta in lines_at[n]:
            terms.append((idx.theta(here, t), -sign * beta))
            terms.append((idx.theta(other, t), sign * beta))
        return terms

    for sign, tag in ((1.0, "bal_hi"), (-1.0, "bal_lo")):
        for n in range(net.n_nodes):
            for t in range(t_count):
                rhs = sign * (
                    sum(net.loads[j].demand[t] for j in loads_at[n])
                    - sum(wind[m, t] for m in farms_at[n])
                )
                b.add_row(balance_terms(n, t, sign), LE, rhs, f"{tag}[{n},{t}]")

    for j, load in enumerate(net.loads):
        for t in range(t_count):
            b.add_row([(idx.dd(j, t), 1.0)], LE, load.demand[t], f"shed_hi[{j},{t}]")
    for m in range(net.n_farms):
        for t in range(t_count):
            b.add_row([(idx.dw(m, t), 1.0)], LE, wind[m, t], f"curtail_hi[{m},{t}]")

    lp = b.build()
    assert (lp.n_rows, lp.n_vars) == recourse_tally(net)
    return lp


def evaluate_scenario(
    net: Network,
    uc: UcSchedule,
    prices: PriceSchedule,
    wind: np.ndarray,
    tol: SolveTolerances | None = None,
) -> RecourseSolution:
    """Solve the recourse LP at a wind realization and unpack the dispatch.

    The objective is zero exactly when the realization can be absorbed by
    redispatch alone.
    """
    lp = assemble_recourse_lp(net, uc, prices, wind)
    sol = solve_lp(lp, tol)
    if sol.status != OPTIMAL:
        raise MalformedProblemError(
            f"recourse LP is {sol.status}; the UC schedule cannot serve this case "
            "(committed minimum generation likely exceeds total sheddable load)"
        )
    idx = RecourseIndex(net)
    t_count = net.n_periods
    x = sol.x
    p = np.array([[x[idx.p(g, t)] for t in range(t_count)] for g in range(net.n_gens)])
    theta = np.array(
        [[x[idx.theta(n, t)] - math.pi for t in range(t_count)] for n in range(net.n_nodes)]
    )
    dw = np.array([[x[idx.dw(m, t)] for t in range(t_count)] for m in range(net.n_farms)])
    dd = np.array([[x[idx.dd(j, t)] for t in range(t_count)] for j in range(net.n_loads)])
    return RecourseSolution(p=p, theta=theta, curtailment=dw, shedding=dd,
                            objective=sol.objective)
