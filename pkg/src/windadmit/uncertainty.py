"""Budgeted polyhedral wind-uncertainty set: vertices, realizations, enumeration.

A vertex assigns each (farm, period) cell one of three states: no
deviation, deviation to the upper boundary, or deviation to the lower
boundary.  Per-farm time budgets and per-period spatial budgets cap how
many cells may deviate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import CapExceededError, DimensionMismatchError, MalformedProblemError

DEFAULT_ENUMERATION_CAP = 2**20


@dataclass(frozen=True)
class UncertaintyBudgets:
    """Deviation budgets; ``metadata`` may record the confidence levels they
    were derived from but is never used in computation."""

    gamma_t: int
    gamma_s: int
    metadata: dict = field(default_factory=dict)

    def validate(self, n_farms: int, n_periods: int) -> None:
        if not (0 <= self.gamma_t <= n_periods):
            raise MalformedProblemError(f"gamma_t={self.gamma_t} outside [0, T={n_periods}]")
        if not (0 <= self.gamma_s <= n_farms):
            raise MalformedProblemError(f"gamma_s={self.gamma_s} outside [0, M={n_farms}]")


@dataclass
class UncertaintyVertex:
    """Binary deviation indicators, shape (M, T) each; at most one of
    ``up``/``down`` is set per cell."""

    up: np.ndarray
    down: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.up.shape

    def validate(self, budgets: UncertaintyBudgets | None = None) -> None:
        if self.up.shape != self.down.shape:
            raise DimensionMismatchError("up/down indicator shapes differ")
        for arr in (self.up, self.down):
            if not np.all((arr == 0) | (arr == 1)):
                raise MalformedProblemError("deviation indicators must be 0/1")
        if np.any(self.up + self.down > 1):
            raise MalformedProblemError("a cell may deviate in at most one direction")
        if budgets is not None:
            m, t = self.up.shape
            budgets.validate(m, t)
            per_farm = (self.up + self.down).sum(axis=1)
            if np.any(per_farm > budgets.gamma_t):
                raise MalformedProblemError("time budget exceeded")
            per_period = (self.up + self.down).sum(axis=0)
            if np.any(per_period > budgets.gamma_s):
                raise MalformedProblemError("spatial budget exceeded")

    @staticmethod
    def zero(n_farms: int, n_periods: int) -> "UncertaintyVertex":
        return UncertaintyVertex(
            up=np.zeros((n_farms, n_periods), dtype=np.int8),
            down=np.zeros((n_farms, n_periods), dtype=np.int8),
        )

    def key(self) -> tuple:
        """Lexicographic sort key: per-cell (up, down) bits, farm-major."""
        m, t = self.up.shape
        return tuple(
            int(b)
            for mm in range(m)
            for tt in range(t)
            for b in (self.up[mm, tt], self.down[mm, tt])
        )


@dataclass
class AdmissibilityBoundary:
    """Per-farm per-period wind output interval [lower, upper] in MW."""

    lower: np.ndarray
    upper: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.lower.shape

    def validate(self, forecast: np.ndarray, capacity: np.ndarray) -> None:
        if self.lower.shape != forecast.shape or self.upper.shape != forecast.shape:
            raise DimensionMismatchError("boundary shape disagrees with forecast")
        cap = capacity[:, None] * np.ones_like(forecast)
        if np.any(self.upper < forecast - 1e-9) or np.any(self.upper > cap + 1e-9):
            raise MalformedProblemError("upper boundary must lie in [forecast, capacity]")
        if np.any(self.lower < -1e-9) or np.any(self.lower > forecast + 1e-9):
            raise MalformedProblemError("lower boundary must lie in [0, forecast]")

    @staticmethod
    def full_width(forecast: np.ndarray, capacity: np.ndarray) -> "AdmissibilityBoundary":
        return AdmissibilityBoundary(
            lower=np.zeros_like(forecast),
            upper=capacity[:, None] * np.ones_like(forecast),
        )

    @staticmethod
    def at_forecast(forecast: np.ndarray) -> "AdmissibilityBoundary":
        return AdmissibilityBoundary(lower=forecast.copy(), upper=forecast.copy())

    def contains(self, other: "AdmissibilityBoundary", tol: float = 1e-6) -> bool:
        """True when ``other``'s interval lies inside this one, cell by cell."""
        return bool(
            np.all(self.lower <= other.lower + tol) and np.all(other.upper <= self.upper + tol)
        )


def realize_wind(
    vertex: UncertaintyVertex,
    boundary: AdmissibilityBoundary,
    forecast: np.ndarray,
) -> np.ndarray:
    """Wind output (MW) realized at a vertex of the uncertainty set."""
    if vertex.shape != forecast.shape or boundary.shape != forecast.shape:
        raise DimensionMismatchError("vertex/boundary/forecast shapes disagree")
    return (
        (boundary.upper - forecast) * vertex.up
        + (boundary.lower - forecast) * vertex.down
        + forecast
    )


def count_vertices(n_farms: int, n_periods: int, budgets: UncertaintyBudgets) -> int:
    """Exact number of vertices, by dynamic programming over periods.

    The state is the per-farm count of deviations used so far (capped at
    the time budget); each period adds any farm subset within the spatial
    budget, with an up/down sign per chosen farm.
    """
    budgets.validate(n_farms, n_periods)
    gt, gs = budgets.gamma_t, budgets.gamma_s
    states: dict[tuple, int] = {tuple([0] * n_farms): 1}
    subsets: list[tuple[int, ...]] = []
    for mask in range(2**n_farms):
        chosen = tuple(m for m in range(n_farms) if mask >> m & 1)
        if len(chosen) <= gs:
            subsets.append(chosen)
    for _ in range(n_periods):
        nxt: dict[tuple, int] = {}
        for used, ways in states.items():
            for chosen in subsets:
                if any(used[m] + 1 > gt for m in chosen):
                    continue
                new = list(used)
                for m in chosen:
                    new[m] += 1
                key = tuple(new)
                nxt[key] = nxt.get(key, 0) + ways * 2 ** len(chosen)
        states = nxt
    return sum(states.values())


def enumerate_vertices(
    n_farms: int,
    n_periods: int,
    budgets: UncertaintyBudgets,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Iterator[UncertaintyVertex]:
    """Yield every vertex exactly once, in lexicographic order of the
    flattened per-cell (up, down) bit string (farm-major, then period).

    Raises :class:`CapExceededError` up front when the exact vertex count
    exceeds ``cap``.
    """
    total = count_vertices(n_farms, n_periods, budgets)
    if total > cap:
        raise CapExceededError(total, cap)

    up = np.zeros((n_farms, n_periods), dtype=np.int8)
    down = np.zeros((n_farms, n_periods), dtype=np.int8)
    farm_used = np.zeros(n_farms, dtype=int)
    period_used = np.zeros(n_periods, dtype=int)
    cells = [(m, t) for m in range(n_farms) for t in range(n_periods)]

    def walk(idx: int) -> Iterator[UncertaintyVertex]:
        if idx == len(cells):
            yield UncertaintyVertex(up=up.copy(), down=down.copy())
            return
        m, t = cells[idx]
        # bit pattern (up, down): 00 < 01 (down) < 10 (up)
        yield from walk(idx + 1)
        if farm_used[m] < budgets.gamma_t and period_used[t] < budgets.gamma_s:
            farm_used[m] += 1
            period_used[t] += 1
            down[m, t] = 1
            yield from walk(idx + 1)
            down[m, t] = 0
            up[m, t] = 1
            yield from walk(idx + 1)
            up[m, t] = 0
            farm_used[m] -= 1
            period_used[t] -= 1

    return walk(0)
