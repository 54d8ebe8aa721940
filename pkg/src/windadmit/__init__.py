"""Risk-minimal admissible region of wind generation under a fixed unit commitment.

The package solves a two-stage robust program: a master that places
per-farm per-period wind output bounds to minimize expected emergency
regulation cost, and a worst-case subproblem certifying that every
deviation vertex within the uncertainty budgets can be absorbed by
redispatch within the tolerable loss.  Everything runs on the in-repo
bounded-variable simplex / branch-and-bound kernel in ``windadmit.lp``.
"""

from .assessment import (
    AssessmentConfig,
    AssessmentResult,
    IterationRecord,
    MasterState,
    init_master,
    run_assessment,
)
from .estimator import AdmissibilityAssessor
from .grid import (
    Network,
    PriceSchedule,
    RecourseSolution,
    UcSchedule,
    assemble_recourse_lp,
    dump_case,
    evaluate_scenario,
    load_case,
    slice_horizon,
)
from .risk import (
    ErrorModel,
    MonteCarloRisk,
    PlaCoefficients,
    PlaConfig,
    QuadratureConfig,
    RiskValue,
    build_pla,
    monte_carlo_risk,
    risk_exact,
    risk_pla,
    sigma_profile,
)
from .scuc import ScucConfig, solve_scuc
from .subproblem import (
    AdmissibilityVerdict,
    CompiledSubproblem,
    SubproblemResult,
    check_admissibility,
    compile_subproblem,
    feasibility_cut,
    oracle_subproblem,
    solve_subproblem,
)
from .uncertainty import (
    AdmissibilityBoundary,
    UncertaintyBudgets,
    UncertaintyVertex,
    count_vertices,
    enumerate_vertices,
    realize_wind,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityAssessor",
    "AdmissibilityBoundary", "AdmissibilityVerdict",
    "AssessmentConfig", "AssessmentResult", "IterationRecord", "MasterState",
    "CompiledSubproblem", "SubproblemResult",
    "ErrorModel", "MonteCarloRisk", "Network", "PlaCoefficients", "PlaConfig",
    "PriceSchedule", "QuadratureConfig", "RecourseSolution", "RiskValue",
    "ScucConfig", "UcSchedule", "UncertaintyBudgets", "UncertaintyVertex",
    "assemble_recourse_lp", "build_pla", "check_admissibility",
    "compile_subproblem", "count_vertices", "dump_case", "enumerate_vertices",
    "evaluate_scenario", "feasibility_cut", "init_master", "load_case",
    "monte_carlo_risk", "oracle_subproblem", "realize_wind", "risk_exact",
    "risk_pla", "run_assessment", "sigma_profile", "slice_horizon",
    "solve_scuc", "solve_subproblem",
]
