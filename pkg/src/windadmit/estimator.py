"""Scikit-learn style front end for the admissibility assessment.

``fit`` learns the risk-minimal admissible region from a case (and an
optional commitment schedule); ``predict`` classifies wind trajectories
by whether the committed system can absorb them by redispatch alone.
Hyperparameters follow the estimator contract (constructor args mirrored
as attributes, ``get_params``/``set_params`` inherited), so the assessor
composes with model-selection tooling.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .assessment import AssessmentConfig, AssessmentResult, run_assessment
from .errors import DimensionMismatchError
from .grid import Network, PriceSchedule, UcSchedule, evaluate_scenario, load_case
from .risk import ErrorModel, PlaConfig
from .scuc import ScucConfig, solve_scuc
from .uncertainty import UncertaintyBudgets


class AdmissibilityAssessor(BaseEstimator):
    """Estimator of the risk-minimal admissible wind-generation region.

    Parameters mirror the run configuration: forecast-error scale, the
    deviation budgets, the tolerable worst-case loss, and the master's
    penalty/termination knobs.
    """

    def __init__(
        self,
        sigma: float = 0.10,
        gamma_t: int = 8,
        gamma_s: int = 1,
        c_loss: float = 0.0,
        penalty: float = 100.0,
        epsilon: float = 1e-3,
        max_iterations: int = 100,
        m_big: float | None = None,
        feasibility_cuts: bool = True,
        pla_alphas: tuple[float, ...] = (0.005, 0.025, 0.495),
        pla_z: int = 4,
        reserve_rate: float = 0.05,
        admissible_tol: float = 1e-5,
    ):
        self.sigma = sigma
        self.gamma_t = gamma_t
        self.gamma_s = gamma_s
        self.c_loss = c_loss
        self.penalty = penalty
        self.epsilon = epsilon
        self.max_iterations = max_iterations
        self.m_big = m_big
        self.feasibility_cuts = feasibility_cuts
        self.pla_alphas = pla_alphas
        self.pla_z = pla_z
        self.reserve_rate = reserve_rate
        self.admissible_tol = admissible_tol

    def fit(self, case, uc=None, y=None):
        """Run the assessment on a case (path, dict, or (Network, prices)).

        ``uc`` may be a schedule, a CSV path, or None to commit units with
        the configured reserve rate.  Returns self; learned state lands in
        ``boundary_``, ``risk_``, ``result_``.
        """
        if isinstance(case, tuple):
            net, prices = case
        else:
            net, prices = load_case(case)
        if uc is None:
            uc = solve_scuc(net, prices, ScucConfig(reserve_rate=self.reserve_rate))
        elif isinstance(uc, (str, Path)):
            uc = UcSchedule.read_csv(uc, net)
        em = ErrorModel.from_scale(self.sigma, net.forecast(), net.capacities())
        budgets = UncertaintyBudgets(gamma_t=self.gamma_t, gamma_s=self.gamma_s)
        cfg = AssessmentConfig(
            c_loss=self.c_loss,
            penalty=self.penalty,
            epsilon=self.epsilon,
            max_iterations=self.max_iterations,
            m_big=self.m_big,
            feasibility_cuts=self.feasibility_cuts,
            pla=PlaConfig(alphas=tuple(self.pla_alphas), z=self.pla_z),
        )
        result: AssessmentResult = run_assessment(net, uc, prices, em, budgets, cfg)
        self.net_ = net
        self.prices_ = prices
        self.uc_ = uc
        self.result_ = result
        self.boundary_ = result.boundary
        self.risk_ = result.g
        self.n_iterations_ = len(result.iterations)
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("call fit before predict/decision_function")

    def _as_trajectories(self, w) -> np.ndarray:
        net: Network = self.net_
        w = np.asarray(w, dtype=float)
        if w.ndim == 2 and w.shape[1] == net.n_farms * net.n_periods:
            w = w.reshape(-1, net.n_farms, net.n_periods)
        if w.ndim == 2 and net.n_farms == 1 and w.shape[1] == net.n_periods:
            w = w[:, None, :]
        if w.ndim != 3 or w.shape[1:] != (net.n_farms, net.n_periods):
            raise DimensionMismatchError(
                f"trajectories must have shape (n, {net.n_farms}, {net.n_periods})"
            )
        return w

    def decision_function(self, w) -> np.ndarray:
        """Negative recourse cost of each trajectory (0 means absorbable)."""
        self._check_fitted()
        out = []
        for traj in self._as_trajectories(w):
            sol = evaluate_scenario(self.net_, self.uc_, self.prices_, traj)
            out.append(-sol.objective)
        return np.array(out)

    def predict(self, w) -> np.ndarray:
        """True for trajectories the committed system absorbs by redispatch."""
        return self.decision_function(w) >= -self.admissible_tol

    def score(self, w, y=None) -> float:
        """Fraction of trajectories absorbed without emergency actions."""
        return float(np.mean(self.predict(w)))
