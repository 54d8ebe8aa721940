"""Bounded-variable primal simplex on a sparse basis factorization.

Phase 1 minimizes an artificial objective to find a feasible basis;
phase 2 optimizes the real objective.  Pricing is Dantzig by default and
falls back to Bland's rule permanently once the objective stalls, which
guarantees termination.  All tie-breaks are by lowest index, so repeated
solves of the same problem are bit-for-bit identical.

The basis is handled as a sparse LU factorization plus a product-form
eta file, refreshed every ``_REFRESH_EVERY`` pivots; constraint matrices
here are power-system sparse, which makes ftran/btran far cheaper than an
explicit dense inverse.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..errors import NumericBreakdownError
from .model import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    MIN,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    LpSolution,
    SolveTolerances,
)

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2
_FREE_NB = 3

_REFRESH_EVERY = 100
_INF = float("inf")


def solve_lp(lp: LinearProgram, tol: SolveTolerances | None = None) -> LpSolution:
    """Solve a linear program; returns primal and dual values when optimal."""
    lp.validate()
    tol = tol or SolveTolerances()
    sign = 1.0 if lp.sense == MIN else -1.0
    sim = _Simplex(lp, sign * lp.obj, tol)
    status, iters = sim.run()
    if status != OPTIMAL:
        return LpSolution(status=status, objective=float("nan"), x=None, duals=None,
                          iterations=iters)
    x = sim.x[: lp.n_vars].copy()
    _verify_primal(lp, x, tol)
    y, rc = sim.dual_values()
    obj = float(lp.obj @ x)
    return LpSolution(
        status=OPTIMAL,
        objective=obj,
        x=x,
        duals=sign * y,
        reduced_costs=sign * rc,
        iterations=iters,
    )


def solve_lp_with_state(
    lp: LinearProgram, tol: SolveTolerances | None = None
) -> tuple[LpSolution, tuple[np.ndarray, np.ndarray] | None]:
    """Internal: like :func:`solve_lp` but also returns the final basis state
    (basis positions, variable statuses) for warm continuation, or None when
    the state is not adoptable (leftover artificials on redundant rows)."""
    lp.validate()
    tol = tol or SolveTolerances()
    sign = 1.0 if lp.sense == MIN else -1.0
    sim = _Simplex(lp, sign * lp.obj, tol)
    status, iters = sim.run()
    if status != OPTIMAL:
        return (
            LpSolution(status=status, objective=float("nan"), x=None, duals=None,
                       iterations=iters),
            None,
        )
    x = sim.x[: lp.n_vars].copy()
    _verify_primal(lp, x, tol)
    y, rc = sim.dual_values()
    sol = LpSolution(status=OPTIMAL, objective=float(lp.obj @ x), x=x,
                     duals=sign * y, reduced_costs=sign * rc, iterations=iters)
    return sol, sim.capture_state()


def warm_solve(
    lp: LinearProgram,
    tol: SolveTolerances,
    state: tuple[np.ndarray, np.ndarray],
) -> tuple[LpSolution, tuple[np.ndarray, np.ndarray] | None] | None:
    """Internal: re-solve a same-shape problem starting from a prior basis.

    The prior basis stays dual feasible under bound changes, so a dual
    simplex pass restores primal feasibility and a short primal cleanup
    finishes.  Returns None when the start cannot be adopted or breaks
    down numerically; callers then fall back to a cold solve.
    """
    sign = 1.0 if lp.sense == MIN else -1.0
    sim = _Simplex(lp, sign * lp.obj, tol)
    try:
        if not sim.adopt_state(state):
            return None
        status, iters = sim.run_warm()
    except NumericBreakdownError:
        return None
    if status != OPTIMAL:
        return (
            LpSolution(status=status, objective=float("nan"), x=None, duals=None,
                       iterations=iters),
            None,
        )
    x = sim.x[: lp.n_vars].copy()
    try:
        _verify_primal(lp, x, tol)
    except NumericBreakdownError:
        return None
    y, rc = sim.dual_values()
    sol = LpSolution(status=OPTIMAL, objective=float(lp.obj @ x), x=x,
                     duals=sign * y, reduced_costs=sign * rc, iterations=iters)
    return sol, sim.capture_state()


def _verify_primal(lp: LinearProgram, x: np.ndarray, tol: SolveTolerances) -> None:
    """Guard against silent factorization drift: re-check feasibility."""
    slack = 1e-5
    if np.any(x < lp.lower - slack * (1.0 + np.abs(lp.lower, where=np.isfinite(lp.lower),
                                                   out=np.zeros_like(lp.lower)))):
        raise NumericBreakdownError("solution violates a lower bound beyond tolerance")
    if np.any(x > lp.upper + slack * (1.0 + np.abs(lp.upper, where=np.isfinite(lp.upper),
                                                   out=np.zeros_like(lp.upper)))):
        raise NumericBreakdownError("solution violates an upper bound beyond tolerance")
    r = lp.a @ x
    scale = slack * (1.0 + np.abs(lp.rhs))
    for i, rel in enumerate(lp.relations):
        err = r[i] - lp.rhs[i]
        bad = (rel == LE and err > scale[i]) or (rel == GE and -err > scale[i]) or (
            rel == EQ and abs(err) > scale[i]
        )
        if bad:
            raise NumericBreakdownError(
                f"row {i} violated by {err:.3g} after solve (relation {rel})"
            )


def _slack_bounds(relation: str) -> tuple[float, float]:
    if relation == LE:
        return (0.0, _INF)
    if relation == GE:
        return (-_INF, 0.0)
    if relation == EQ:
        return (0.0, 0.0)
    raise AssertionError(relation)


class _Basis:
    """Sparse LU of the basis plus an eta file for pivot updates."""

    def __init__(self, m: int):
        self.m = m
        self.lu = None  # None means the basis is the (signed) identity
        self.diag_signs: np.ndarray | None = None
        self.etas: list[tuple[int, np.ndarray]] = []

    def set_identity(self, signs: np.ndarray) -> None:
        self.lu = None
        self.diag_signs = signs
        self.etas = []

    def factor(self, b_matrix: sparse.csc_matrix) -> None:
        try:
            self.lu = splu(b_matrix.tocsc())
        except RuntimeError as exc:  # SuperLU signals singularity this way
            raise NumericBreakdownError("basis matrix singular during refactorization") from exc
        self.diag_signs = None
        self.etas = []

    def push_eta(self, pos: int, w: np.ndarray) -> None:
        piv = w[pos]
        eta = -w / piv
        eta[pos] = 1.0 / piv
        self.etas.append((pos, eta))

    def ftran(self, v: np.ndarray) -> np.ndarray:
        """Solve B x = v through the factorization and eta file."""
        if self.lu is None:
            x = v * self.diag_signs
        else:
            x = self.lu.solve(v)
        for pos, eta in self.etas:
            t = x[pos]
            if t != 0.0:
                x = x + eta * t
                x[pos] = eta[pos] * t
        return x

    def btran(self, v: np.ndarray) -> np.ndarray:
        """Solve y B = v (row form) through the eta file and factorization."""
        y = v.copy()
        for pos, eta in reversed(self.etas):
            y[pos] = float(y @ eta)
        if self.lu is None:
            return y * self.diag_signs
        return self.lu.solve(y, trans="T")


class _Simplex:
    """Internal minimization solver over ``[A | I | artificials]``."""

    def __init__(self, lp: LinearProgram, cost: np.ndarray, tol: SolveTolerances):
        self.tol = tol
        self.m, self.n = lp.a.shape
        self.a_csc = sparse.csc_matrix(lp.a)
        self.a_csc.eliminate_zeros()
        self.b = np.asarray(lp.rhs, dtype=float)
        slack_lo = np.empty(self.m)
        slack_hi = np.empty(self.m)
        for i, rel in enumerate(lp.relations):
            slack_lo[i], slack_hi[i] = _slack_bounds(rel)
        self.lower = np.concatenate([lp.lower, slack_lo])
        self.upper = np.concatenate([lp.upper, slack_hi])
        self.cost = np.concatenate([cost, np.zeros(self.m)])
        self.n_art = 0
        self.art_rows = np.empty(0, dtype=int)
        self.art_signs = np.empty(0)
        self.pivots = 0
        self.bland = False
        self._stall = 0
        self._last_obj = _INF
        self._basis_fac = _Basis(self.m)

    # ---- column access ---------------------------------------------------

    def _column_dense(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        if j < self.n:
            sl = slice(self.a_csc.indptr[j], self.a_csc.indptr[j + 1])
            col[self.a_csc.indices[sl]] = self.a_csc.data[sl]
        elif j < self.n + self.m:
            col[j - self.n] = 1.0
        else:
            k = j - self.n - self.m
            col[self.art_rows[k]] = self.art_signs[k]
        return col

    def _reduced_costs(self, cost: np.ndarray, y: np.ndarray) -> np.ndarray:
        d = np.empty(self.ncols)
        d[: self.n] = cost[: self.n] - self.a_csc.T.dot(y)
        d[self.n : self.n + self.m] = cost[self.n : self.n + self.m] - y
        if self.n_art:
            d[self.n + self.m :] = cost[self.n + self.m :] - self.art_signs * y[self.art_rows]
        return d

    # ---- setup -----------------------------------------------------------

    def _start(self) -> None:
        nm = self.n + self.m
        status = np.empty(nm, dtype=np.int8)
        x = np.zeros(nm)
        for j in range(nm):
            lo, hi = self.lower[j], self.upper[j]
            if np.isfinite(lo):
                status[j], x[j] = _AT_LOWER, lo
            elif np.isfinite(hi):
                status[j], x[j] = _AT_UPPER, hi
            else:
                status[j], x[j] = _FREE_NB, 0.0
        # tentatively make every slack basic; rows whose slack value violates
        # its bounds get an artificial instead
        resid = self.b - self.a_csc.dot(x[: self.n])
        art_rows, art_signs, art_vals = [], [], []
        basis = np.arange(self.n, nm)
        for i in range(self.m):
            lo, hi = self.lower[self.n + i], self.upper[self.n + i]
            v = resid[i]
            if lo - 1e-12 <= v <= hi + 1e-12:
                x[self.n + i] = v
                status[self.n + i] = _BASIC
            else:
                pinned = min(max(v, lo), hi)
                x[self.n + i] = pinned
                status[self.n + i] = _AT_LOWER if pinned == lo else _AT_UPPER
                r = v - pinned
                art_rows.append(i)
                art_signs.append(1.0 if r > 0 else -1.0)
                art_vals.append(abs(r))
                basis[i] = nm + len(art_rows) - 1
        self.n_art = len(art_rows)
        self.art_rows = np.array(art_rows, dtype=int)
        self.art_signs = np.array(art_signs)
        self.ncols = nm + self.n_art
        self.x = np.concatenate([x, np.array(art_vals)])
        self.vstat = np.concatenate([status, np.full(self.n_art, _BASIC, dtype=np.int8)])
        self.lower = np.concatenate([self.lower, np.zeros(self.n_art)])
        self.upper = np.concatenate([self.upper, np.full(self.n_art, _INF)])
        self.cost = np.concatenate([self.cost, np.zeros(self.n_art)])
        self.basis = basis
        signs = np.ones(self.m)
        for k, i in enumerate(self.art_rows):
            signs[i] = self.art_signs[k]
        self._basis_fac.set_identity(signs)

    # ---- warm-start support --------------------------------------------------

    def capture_state(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(basis, statuses) over structural+slack columns; None if any
        artificial column is still basic (redundant rows)."""
        if np.any(self.basis >= self.n + self.m):
            return None
        return self.basis.copy(), self.vstat[: self.n + self.m].copy()

    def adopt_state(self, state: tuple[np.ndarray, np.ndarray]) -> bool:
        basis, vstat = state
        nm = self.n + self.m
        if basis.shape != (self.m,) or vstat.shape != (nm,):
            return False
        self.n_art = 0
        self.ncols = nm
        self.basis = basis.copy()
        self.vstat = vstat.copy()
        x = np.zeros(nm)
        for j in range(nm):
            st = self.vstat[j]
            if st == _AT_LOWER:
                x[j] = self.lower[j]
            elif st == _AT_UPPER:
                x[j] = self.upper[j]
            elif st == _FREE_NB:
                x[j] = 0.0
        # nonbasic statuses must point at finite bounds under the new bounds
        for j in range(nm):
            if self.vstat[j] == _AT_LOWER and not np.isfinite(self.lower[j]):
                if not np.isfinite(self.upper[j]):
                    self.vstat[j] = _FREE_NB
                    x[j] = 0.0
                else:
                    self.vstat[j] = _AT_UPPER
                    x[j] = self.upper[j]
            elif self.vstat[j] == _AT_UPPER and not np.isfinite(self.upper[j]):
                if not np.isfinite(self.lower[j]):
                    self.vstat[j] = _FREE_NB
                    x[j] = 0.0
                else:
                    self.vstat[j] = _AT_LOWER
                    x[j] = self.lower[j]
        self.x = x
        try:
            self._basis_fac.factor(self._basis_matrix())
        except NumericBreakdownError:
            return False
        self._recompute_basics()
        return True

    def _recompute_basics(self) -> None:
        nb_mask = np.zeros(self.ncols, dtype=bool)
        nb_mask[: self.n] = True
        nb_mask[self.basis] = False
        xs = np.where(nb_mask[: self.n], self.x[: self.n], 0.0)
        contrib = self.a_csc.dot(xs)
        for j in range(self.n, self.ncols):
            if self.vstat[j] != _BASIC and self.x[j] != 0.0:
                contrib = contrib + self._column_dense(j) * self.x[j]
        self.x[self.basis] = self._basis_fac.ftran(self.b - contrib)

    def run_warm(self) -> tuple[str, int]:
        """Dual pass to primal feasibility, then primal pass to optimality."""
        status, it1 = self._dual_iterate(self.cost)
        if status == INFEASIBLE:
            return INFEASIBLE, it1
        self.bland = False
        self._stall = 0
        self._last_obj = _INF
        status, it2 = self._iterate(self.cost, phase1=False)
        return status, it1 + it2

    def _dual_iterate(self, cost: np.ndarray) -> tuple[str, int]:
        """Bounded dual simplex: drive basic bound violations out while the
        reduced costs stay sign-feasible.  No eligible entering column for a
        violated row proves primal infeasibility."""
        max_iters = max(20000, 50 * (self.m + self.n))
        feas = self.tol.feas_tol
        it = 0
        while True:
            it += 1
            if it > max_iters:
                raise NumericBreakdownError("dual simplex exceeded its iteration cap")
            if len(self._basis_fac.etas) >= _REFRESH_EVERY:
                self._refactorize()
            xb = self.x[self.basis]
            lob = self.lower[self.basis]
            upb = self.upper[self.basis]
            below = np.maximum(lob - xb, 0.0)
            above = np.maximum(xb - upb, 0.0)
            viol = np.where(np.isfinite(lob), below, 0.0) + np.where(
                np.isfinite(upb), above, 0.0
            )
            scale = 1.0 + np.abs(xb)
            r = int(np.argmax(viol / scale))
            if viol[r] <= feas * scale[r]:
                return OPTIMAL, it  # primal feasible; caller cleans up
            snap_lower = bool(below[r] > 0.0)
            target = lob[r] if snap_lower else upb[r]
            unit = np.zeros(self.m)
            unit[r] = 1.0
            rho = self._basis_fac.btran(unit)
            alpha = np.empty(self.ncols)
            alpha[: self.n] = self.a_csc.T.dot(rho)
            alpha[self.n : self.n + self.m] = rho
            if self.n_art:
                alpha[self.n + self.m :] = self.art_signs * rho[self.art_rows]
            y = self._basis_fac.btran(cost[self.basis])
            d = self._reduced_costs(cost, y)
            # entering must push x_r toward its violated bound without
            # breaking dual feasibility
            need = 1.0 if snap_lower else -1.0  # required sign of x_r change
            fixed = self.upper - self.lower <= 0.0
            at_lo = (self.vstat == _AT_LOWER) & ~fixed
            at_up = (self.vstat == _AT_UPPER) & ~fixed
            free = self.vstat == _FREE_NB
            # raising x_j changes x_r by -alpha_j; lowering by +alpha_j
            ok_lo = at_lo & (-need * alpha > self.tol.pivot_tol)
            ok_up = at_up & (need * alpha > self.tol.pivot_tol)
            ok_fr = free & (np.abs(alpha) > self.tol.pivot_tol)
            cand = np.nonzero(ok_lo | ok_up | ok_fr)[0]
            if self.n_art and cand.size:
                cand = cand[cand < self.n + self.m]
            if cand.size == 0:
                return INFEASIBLE, it
            ratios = np.abs(d[cand]) / np.abs(alpha[cand])
            best = float(ratios.min())
            near = cand[ratios <= best + 1e-9 * (1.0 + best)]
            mags = np.abs(alpha[near])
            top = mags.max()
            close = near[mags >= top - 1e-12]
            j = int(close[int(np.argmin(close))])
            sigma = 1.0 if (self.vstat[j] == _AT_LOWER or
                            (self.vstat[j] == _FREE_NB and -need * alpha[j] > 0)) else -1.0
            w = self._basis_fac.ftran(self._column_dense(j))
            if abs(w[r]) < self.tol.pivot_tol:
                self._refactorize()
                continue
            t = (self.x[self.basis[r]] - target) / (sigma * w[r])
            if t < -1e-7:
                self._refactorize()
                continue
            self._pivot(j, sigma, w, sigma * w, r, max(t, 0.0), snap_lower=snap_lower)

    # ---- core iteration ----------------------------------------------------

    def run(self) -> tuple[str, int]:
        self._start()
        iters = 0
        if self.n_art:
            phase1 = np.zeros(self.ncols)
            phase1[self.n + self.m :] = 1.0
            status, it1 = self._iterate(phase1, phase1=True)
            iters += it1
            if status == UNBOUNDED:
                raise NumericBreakdownError("phase-1 objective unbounded (internal error)")
            infeas = float(np.sum(self.x[self.n + self.m :]))
            if infeas > self.tol.feas_tol * (1.0 + float(np.abs(self.b).max(initial=0.0))):
                return INFEASIBLE, iters
            self._expel_artificials()
        self.bland = False
        self._stall = 0
        self._last_obj = _INF
        status, it2 = self._iterate(self.cost, phase1=False)
        iters += it2
        return status, iters

    def _iterate(self, cost: np.ndarray, phase1: bool) -> tuple[str, int]:
        max_iters = max(20000, 50 * (self.m + self.n))
        it = 0
        while True:
            it += 1
            if it > max_iters:
                raise NumericBreakdownError(
                    f"simplex exceeded {max_iters} iterations (m={self.m}, n={self.n})"
                )
            if len(self._basis_fac.etas) >= _REFRESH_EVERY:
                self._refactorize()
            y = self._basis_fac.btran(cost[self.basis])
            d = self._reduced_costs(cost, y)
            j = self._entering(d)
            if j < 0:
                return OPTIMAL, it
            sigma = self._direction(j, d[j])
            w = self._basis_fac.ftran(self._column_dense(j))
            step = sigma * w
            leave_pos, limit = self._ratio_test(step)
            span = self.upper[j] - self.lower[j]
            if span <= limit:
                if not np.isfinite(span):
                    # only trust an unbounded verdict from fresh factors:
                    # pricing noise on a long eta file can fake a ray
                    if self._basis_fac.etas:
                        self._refactorize()
                        continue
                    return UNBOUNDED, it
                # bound flip: entering variable runs to its other bound
                self.x[self.basis] -= step * span
                self.x[j] = self.upper[j] if sigma > 0 else self.lower[j]
                self.vstat[j] = _AT_UPPER if sigma > 0 else _AT_LOWER
            else:
                if leave_pos < 0:
                    if self._basis_fac.etas:
                        self._refactorize()
                        continue
                    return UNBOUNDED, it
                self._pivot(j, sigma, w, step, leave_pos, max(limit, 0.0))
            self._track_progress(cost)

    def _entering(self, d: np.ndarray) -> int:
        tol = self.tol.duality_tol * 0.1
        lo_ok = (self.vstat == _AT_LOWER) & (d < -tol)
        up_ok = (self.vstat == _AT_UPPER) & (d > tol)
        fr_ok = (self.vstat == _FREE_NB) & (np.abs(d) > tol)
        fixed = self.upper - self.lower <= 0.0
        cand = (lo_ok | up_ok | fr_ok) & ~fixed
        if self.n_art:
            cand[self.n + self.m :] = False  # artificials never re-enter once out
        idx = np.nonzero(cand)[0]
        if idx.size == 0:
            return -1
        if self.bland:
            return int(idx[0])
        score = np.abs(d[idx])
        return int(idx[int(np.argmax(score))])  # argmax takes the first (lowest index) tie

    def _direction(self, j: int, dj: float) -> float:
        st = self.vstat[j]
        if st == _AT_LOWER:
            return 1.0
        if st == _AT_UPPER:
            return -1.0
        return 1.0 if dj < 0 else -1.0

    def _ratio_test(self, step: np.ndarray) -> tuple[int, float]:
        """Two-pass (Harris-style) ratio test; returns (basis position, limit).

        Pass 1 finds the smallest ratio with each row's bound relaxed by a
        small absolute amount; pass 2 picks the largest pivot among rows
        whose true ratio fits under that relaxed minimum.  Transient bound
        violations are thereby capped in value space, not ratio space,
        which keeps huge step components from teleporting basic variables.
        """
        ptol = self.tol.pivot_tol
        xb = self.x[self.basis]
        lob = self.lower[self.basis]
        upb = self.upper[self.basis]
        delta = 1e-7 * (1.0 + np.abs(xb))
        ratios = np.full(self.m, _INF)
        relaxed = np.full(self.m, _INF)
        pos = step > ptol
        if np.any(pos):
            slack = np.maximum(xb[pos] - lob[pos], 0.0)
            ratios[pos] = slack / step[pos]
            relaxed[pos] = (slack + delta[pos]) / step[pos]
        neg = step < -ptol
        if np.any(neg):
            slack = np.maximum(upb[neg] - xb[neg], 0.0)
            ratios[neg] = slack / (-step[neg])
            relaxed[neg] = (slack + delta[neg]) / (-step[neg])
        if self.m == 0 or not np.any(np.isfinite(ratios)):
            return -1, _INF
        if self.bland:
            # exact minimum, lowest variable index: termination guarantee
            limit = float(ratios.min())
            near = np.nonzero(ratios <= limit)[0]
            leave = int(near[int(np.argmin(self.basis[near]))])
            return leave, limit
        t_max = float(relaxed.min())
        cand = np.nonzero(ratios <= t_max)[0]
        mags = np.abs(step[cand])
        best = mags.max()
        close = cand[mags >= best - 1e-12]
        leave = int(close[int(np.argmin(self.basis[close]))])
        return leave, float(max(ratios[leave], 0.0))

    def _pivot(
        self,
        j: int,
        sigma: float,
        w: np.ndarray,
        step: np.ndarray,
        leave_pos: int,
        t: float,
        snap_lower: bool | None = None,
    ) -> None:
        lv = int(self.basis[leave_pos])
        self.x[self.basis] -= step * t
        self.x[j] = self.x[j] + sigma * t
        if snap_lower is not None:
            prefer_lower = snap_lower
        elif step[leave_pos] > 0:
            prefer_lower = True
        elif step[leave_pos] < 0:
            prefer_lower = False
        else:  # degenerate expulsion: pick the side nearest the current value
            prefer_lower = abs(self.x[lv] - self.lower[lv]) <= abs(self.x[lv] - self.upper[lv])
        if prefer_lower and not np.isfinite(self.lower[lv]):
            prefer_lower = False
        if not prefer_lower and not np.isfinite(self.upper[lv]):
            prefer_lower = True
        if np.isfinite(self.lower[lv]) or np.isfinite(self.upper[lv]):
            if prefer_lower:
                self.x[lv] = self.lower[lv]
                self.vstat[lv] = _AT_LOWER
            else:
                self.x[lv] = self.upper[lv]
                self.vstat[lv] = _AT_UPPER
        else:
            self.vstat[lv] = _FREE_NB
            self.x[lv] = 0.0
        self.vstat[j] = _BASIC
        self.basis[leave_pos] = j
        if abs(w[leave_pos]) < self.tol.pivot_tol:
            raise NumericBreakdownError("degenerate pivot element; basis nearly singular")
        self._basis_fac.push_eta(leave_pos, w)
        self.pivots += 1
        if abs(w[leave_pos]) < 1e-6:
            # a near-singular eta would amplify noise by 1/pivot into every
            # later solve; refresh the factorization before it can spread
            self._refactorize()

    def _track_progress(self, cost: np.ndarray) -> None:
        if self.bland:
            return
        obj = float(cost @ self.x)
        if obj < self._last_obj - 1e-11 * (1.0 + abs(obj)):
            self._last_obj = obj
            self._stall = 0
        else:
            self._stall += 1
            if self._stall > self.tol.stall_limit:
                self.bland = True

    # ---- maintenance -------------------------------------------------------

    def _basis_matrix(self) -> sparse.csc_matrix:
        rows_acc, cols_acc, vals_acc = [], [], []
        for k, j in enumerate(self.basis):
            j = int(j)
            if j < self.n:
                sl = slice(self.a_csc.indptr[j], self.a_csc.indptr[j + 1])
                idx = self.a_csc.indices[sl]
                rows_acc.append(idx)
                cols_acc.append(np.full(idx.size, k, dtype=idx.dtype))
                vals_acc.append(self.a_csc.data[sl])
            elif j < self.n + self.m:
                rows_acc.append(np.array([j - self.n]))
                cols_acc.append(np.array([k]))
                vals_acc.append(np.array([1.0]))
            else:
                kk = j - self.n - self.m
                rows_acc.append(np.array([self.art_rows[kk]]))
                cols_acc.append(np.array([k]))
                vals_acc.append(np.array([self.art_signs[kk]]))
        coo = sparse.coo_matrix(
            (np.concatenate(vals_acc),
             (np.concatenate(rows_acc), np.concatenate(cols_acc))),
            shape=(self.m, self.m),
        )
        return coo.tocsc()

    def _refactorize(self) -> None:
        self._basis_fac.factor(self._basis_matrix())
        nb_mask = np.zeros(self.ncols, dtype=bool)
        nb_mask[: self.n] = True
        nb_mask[self.basis] = False
        xs = np.where(nb_mask[: self.n], self.x[: self.n], 0.0)
        contrib = self.a_csc.dot(xs)
        for j in range(self.n, self.ncols):
            if self.vstat[j] != _BASIC and self.x[j] != 0.0:
                contrib = contrib + self._column_dense(j) * self.x[j]
        self.x[self.basis] = self._basis_fac.ftran(self.b - contrib)

    def _expel_artificials(self) -> None:
        """Pivot basic artificials out, or freeze them on redundant rows."""
        for pos in range(self.m):
            j = int(self.basis[pos])
            if j < self.n + self.m:
                continue
            unit = np.zeros(self.m)
            unit[pos] = 1.0
            row = self._basis_fac.btran(unit)  # row pos of the basis inverse
            entries = np.concatenate([self.a_csc.T.dot(row), row])
            done = False
            for cand in np.nonzero(np.abs(entries) > 1e-7)[0]:
                cand = int(cand)
                if self.vstat[cand] == _BASIC or self.upper[cand] - self.lower[cand] <= 0.0:
                    continue
                w = self._basis_fac.ftran(self._column_dense(cand))
                if abs(w[pos]) <= self.tol.pivot_tol:
                    continue
                self._pivot(cand, 1.0, w, w, pos, 0.0)
                done = True
                break
            if not done:
                # redundant row: keep the artificial pinned at zero
                self.upper[j] = 0.0

    # ---- extraction ----------------------------------------------------------

    def dual_values(self) -> tuple[np.ndarray, np.ndarray]:
        y = self._basis_fac.btran(self.cost[self.basis])
        rc = self.cost[: self.n] - self.a_csc.T.dot(y)
        return y, rc
