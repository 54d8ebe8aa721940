"""Problem containers for the bounded-variable LP / MILP kernel.

All problems are dense: a row-major coefficient matrix, one relation and
right-hand side per row, and explicit lower/upper bounds per variable
(``-inf``/``+inf`` allowed).  Relations are the strings ``"<="``, ``"="``
and ``">="``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import MalformedProblemError

LE = "<="
EQ = "="
GE = ">="
_RELATIONS = (LE, EQ, GE)

MIN = "min"
MAX = "max"


@dataclass
class SolveTolerances:
    """Numeric tolerances shared by the LP and MILP solvers."""

    feas_tol: float = 1e-7
    duality_tol: float = 1e-6
    int_tol: float = 1e-6
    opt_gap: float = 1e-6
    pivot_tol: float = 1e-9
    # Dantzig pricing switches to Bland's rule after this many pivots
    # without objective progress (anti-cycling).
    stall_limit: int = 1000


@dataclass
class LinearProgram:
    sense: str
    obj: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    a: np.ndarray
    relations: list[str]
    rhs: np.ndarray
    var_names: list[str] | None = None
    row_names: list[str] | None = None

    @property
    def n_vars(self) -> int:
        return self.a.shape[1]

    @property
    def n_rows(self) -> int:
        return self.a.shape[0]

    def validate(self) -> None:
        if self.sense not in (MIN, MAX):
            raise MalformedProblemError(f"unknown sense {self.sense!r}")
        m, n = self.a.shape
        if self.obj.shape != (n,) or self.lower.shape != (n,) or self.upper.shape != (n,):
            raise MalformedProblemError("objective/bound vectors disagree with matrix width")
        if self.rhs.shape != (m,) or len(self.relations) != m:
            raise MalformedProblemError("rhs/relations disagree with matrix height")
        for rel in self.relations:
            if rel not in _RELATIONS:
                raise MalformedProblemError(f"unknown relation {rel!r}")
        if not np.all(np.isfinite(self.a)):
            raise MalformedProblemError("constraint coefficients must be finite")
        if not np.all(np.isfinite(self.obj)):
            raise MalformedProblemError("objective coefficients must be finite")
        if not np.all(np.isfinite(self.rhs)):
            raise MalformedProblemError("right-hand sides must be finite")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise MalformedProblemError("bounds may be infinite but not NaN")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise MalformedProblemError(f"variable {self._vname(j)} has lower > upper")

    def _vname(self, j: int) -> str:
        if self.var_names and j < len(self.var_names):
            return self.var_names[j]
        return f"x{j}"


@dataclass
class MilpProblem:
    lp: LinearProgram
    integer: np.ndarray  # bool mask over variables

    def validate(self) -> None:
        self.lp.validate()
        if self.integer.shape != (self.lp.n_vars,):
            raise MalformedProblemError("integer mask disagrees with variable count")
        bad = self.integer & ~(np.isfinite(self.lp.lower) & np.isfinite(self.lp.upper))
        if np.any(bad):
            j = int(np.argmax(bad))
            raise MalformedProblemError(
                f"integer variable {self.lp._vname(j)} must have finite bounds"
            )


OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NODE_LIMIT = "node_limit"


@dataclass
class LpSolution:
    status: str
    objective: float
    x: np.ndarray | None
    duals: np.ndarray | None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0

    def dual_objective(self, lp: LinearProgram, tol: float = 1e-7) -> float:
        """Value of the LP dual implied by ``duals``/``reduced_costs``.

        Computed independently of the primal values: ``y.b`` plus the bound
        contributions of the reduced costs.  Returns ``nan`` when the
        solution is not optimal.
        """
        if self.status != OPTIMAL or self.duals is None or self.reduced_costs is None:
            return float("nan")
        sign = 1.0 if lp.sense == MIN else -1.0
        y = sign * self.duals
        rc = sign * self.reduced_costs
        val = float(y @ lp.rhs)
        for j in range(lp.n_vars):
            r = rc[j]
            if r > tol:
                if not np.isfinite(lp.lower[j]):
                    return float("nan")  # dual infeasible; should not happen at optimum
                val += r * lp.lower[j]
            elif r < -tol:
                if not np.isfinite(lp.upper[j]):
                    return float("nan")
                val += r * lp.upper[j]
        return sign * val


@dataclass
class MilpSolution:
    status: str
    objective: float
    x: np.ndarray | None
    nodes: int
    gap: float
    iterations: int = 0


class LpBuilder:
    """Incremental construction of a :class:`LinearProgram`.

    Rows are collected as sparse term lists and densified once at
    :meth:`build`; variable indices are returned by :meth:`add_var`.
    """

    def __init__(self, sense: str = MIN):
        self.sense = sense
        self._obj: list[float] = []
        self._lower: list[float] = []
        self._upper: list[float] = []
        self._names: list[str] = []
        self._integer: list[bool] = []
        self._rows: list[list[tuple[int, float]]] = []
        self._relations: list[str] = []
        self._rhs: list[float] = []
        self._row_names: list[str] = []

    @property
    def n_vars(self) -> int:
        return len(self._obj)

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    def add_var(
        self,
        name: str,
        lower: float = 0.0,
        upper: float = float("inf"),
        obj: float = 0.0,
        integer: bool = False,
    ) -> int:
        self._names.append(name)
        self._lower.append(lower)
        self._upper.append(upper)
        self._obj.append(obj)
        self._integer.append(integer)
        return len(self._obj) - 1

    def add_row(
        self,
        terms: Iterable[tuple[int, float]],
        relation: str,
        rhs: float,
        name: str | None = None,
    ) -> int:
        terms = list(terms)
        for j, _ in terms:
            if not 0 <= j < len(self._obj):
                raise MalformedProblemError(f"row references undeclared variable index {j}")
        self._rows.append(terms)
        self._relations.append(relation)
        self._rhs.append(float(rhs))
        self._row_names.append(name or f"r{len(self._rows) - 1}")
        return len(self._rows) - 1

    def set_objective(self, j: int, coef: float) -> None:
        self._obj[j] = float(coef)

    def build(self) -> LinearProgram:
        m, n = len(self._rows), len(self._obj)
        a = np.zeros((m, n))
        for i, terms in enumerate(self._rows):
            for j, coef in terms:
                a[i, j] += coef
        lp = LinearProgram(
            sense=self.sense,
            obj=np.array(self._obj, dtype=float),
            lower=np.array(self._lower, dtype=float),
            upper=np.array(self._upper, dtype=float),
            a=a,
            relations=list(self._relations),
            rhs=np.array(self._rhs, dtype=float),
            var_names=list(self._names),
            row_names=list(self._row_names),
        )
        lp.validate()
        return lp

    def build_milp(self) -> MilpProblem:
        milp = MilpProblem(lp=self.build(), integer=np.array(self._integer, dtype=bool))
        milp.validate()
        return milp
