"""Command-line surface tying the pipeline together.

Subcommands: ``assess`` (full boundary optimization), ``check`` (single
admissibility verdict), ``risk`` (exact vs. piecewise-linear vs. Monte
Carlo for a boundary), ``scuc`` (generate a commitment schedule), and
``validate`` (scenario replay against a boundary).

Exit codes: 0 success, 1 usage/input error, 2 solver or iteration failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import assessment as am
from . import reports
from .config import RunConfig, load_config
from .errors import (
    CaseSchemaError,
    ConfigError,
    WindadmitError,
)
from .grid import Network, PriceSchedule, UcSchedule, load_case
from .risk import (
    ErrorModel,
    MonteCarloRisk,
    PlaConfig,
    QuadratureConfig,
    build_pla,
    monte_carlo_risk,
    risk_exact,
    risk_pla,
)
from .scuc import ScucConfig, solve_scuc
from .subproblem import check_admissibility
from .uncertainty import (
    AdmissibilityBoundary,
    UncertaintyBudgets,
    UncertaintyVertex,
    realize_wind,
)


class UsageError(WindadmitError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we want 1
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="windadmit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assess", help="optimize the admissible region")
    p.add_argument("--config", required=True, help="run configuration (TOML)")
    p.add_argument("--out", help="output directory (overrides config)")

    p = sub.add_parser("check", help="admissibility verdict for a boundary")
    p.add_argument("--config", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--boundary", help="boundary CSV to check")
    group.add_argument("--full-width", action="store_true",
                       help="check the whole output range")

    p = sub.add_parser("risk", help="exact vs PLA vs Monte Carlo risk of a boundary")
    p.add_argument("--config", required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--mc", action="store_true", help="include the Monte Carlo estimate")

    p = sub.add_parser("scuc", help="generate a commitment schedule")
    p.add_argument("--config", required=True)
    p.add_argument("--reserve-rate", type=float, default=None)
    p.add_argument("--out", help="CSV path for the schedule")

    p = sub.add_parser("validate", help="scenario replay against a boundary")
    p.add_argument("--config", required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--samples", type=int, default=200,
                   help="interior trajectories to replay (smoke test)")
    p.add_argument("--vertices", type=int, default=50,
                   help="random extreme points to certify")
    return parser


def _load_inputs(cfg: RunConfig) -> tuple[Network, PriceSchedule, UcSchedule]:
    net, prices = load_case(cfg.case)
    if cfg.uc is not None:
        uc = UcSchedule.read_csv(cfg.uc, net)
    else:
        uc = solve_scuc(net, prices, ScucConfig(reserve_rate=cfg.reserve_rate))
    return net, prices, uc


def _assessment_config(cfg: RunConfig) -> am.AssessmentConfig:
    return am.AssessmentConfig(
        c_loss=cfg.c_loss,
        penalty=cfg.penalty,
        epsilon=cfg.epsilon,
        max_iterations=cfg.max_iterations,
        m_big=cfg.m_big,
        feasibility_cuts=cfg.feasibility_cuts,
        pla=PlaConfig(alphas=cfg.pla_alphas, z=cfg.pla_z),
        quadrature=QuadratureConfig(tol=cfg.quadrature_tol),
    )


def _run_single(cfg: RunConfig, net, prices, uc, **overrides) -> am.AssessmentResult:
    em = ErrorModel.from_scale(overrides.get("sigma", cfg.sigma), net.forecast(),
                               net.capacities())
    budgets = UncertaintyBudgets(
        gamma_t=overrides.get("gamma_t", cfg.gamma_t), gamma_s=cfg.gamma_s
    )
    return am.run_assessment(net, uc, prices, em, budgets, _assessment_config(cfg))


def _cmd_assess(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out) if args.out else cfg.output_dir
    net, prices, uc = _load_inputs(cfg)
    result = _run_single(cfg, net, prices, uc)
    paths = reports.emit_reports(result, out_dir)
    if cfg.sweep_sigmas:
        rows = []
        for s in cfg.sweep_sigmas:
            rows.append((s, _run_single(cfg, net, prices, uc, sigma=s).g))
        reports.emit_sweep(rows, ("sigma", "risk_usd"), out_dir / "risk_vs_sigma.csv")
    if cfg.sweep_gamma_ts:
        rows = []
        for g in cfg.sweep_gamma_ts:
            rows.append((g, _run_single(cfg, net, prices, uc, gamma_t=g).g))
        reports.emit_sweep(rows, ("gamma_t", "risk_usd"), out_dir / "risk_vs_gamma.csv")
    print(json.dumps({
        "status": result.status,
        "risk_usd": result.g,
        "iterations": len(result.iterations),
        "outputs": {k: str(v) for k, v in paths.items()},
    }, sort_keys=True))
    return 0 if result.status == am.CONVERGED else 2


def _boundary_from_args(args, cfg: RunConfig, net: Network) -> AdmissibilityBoundary:
    if getattr(args, "full_width", False):
        return AdmissibilityBoundary.full_width(net.forecast(), net.capacities())
    return reports.read_boundary_csv(args.boundary, net.n_farms, net.n_periods)


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    net, prices, uc = _load_inputs(cfg)
    boundary = _boundary_from_args(args, cfg, net)
    budgets = UncertaintyBudgets(gamma_t=cfg.gamma_t, gamma_s=cfg.gamma_s)
    verdict = check_admissibility(net, uc, prices, boundary, budgets,
                                  c_loss=cfg.c_loss, m_big=cfg.m_big)
    doc = {
        "admissible": verdict.admissible,
        "worst_case_cost_usd": verdict.worst_cost,
        "c_loss": verdict.c_loss,
        "worst_vertex": _sparse_vertex(verdict.certificate.vertex),
        "realized_wind_mw": [
            [float(x) for x in row] for row in verdict.certificate.realized_wind
        ],
    }
    print(json.dumps(doc, sort_keys=True))
    return 0


def _sparse_vertex(vertex: UncertaintyVertex) -> list[list]:
    out = []
    m_count, t_count = vertex.shape
    for m in range(m_count):
        for t in range(t_count):
            if vertex.up[m, t]:
                out.append([m + 1, t + 1, "up"])
            elif vertex.down[m, t]:
                out.append([m + 1, t + 1, "down"])
    return out


def _cmd_risk(args) -> int:
    cfg = load_config(args.config)
    net, prices = load_case(cfg.case)
    boundary = reports.read_boundary_csv(args.boundary, net.n_farms, net.n_periods)
    em = ErrorModel.from_scale(cfg.sigma, net.forecast(), net.capacities())
    exact = risk_exact(boundary, em, prices, QuadratureConfig(tol=cfg.quadrature_tol))
    pc = build_pla(em, PlaConfig(alphas=cfg.pla_alphas, z=cfg.pla_z), prices)
    pla = risk_pla(boundary, pc)
    doc = {"risk_exact_usd": exact.total, "risk_pla_usd": pla.total}
    if args.mc:
        mc: MonteCarloRisk = monte_carlo_risk(
            boundary, em, prices, cfg.mc_samples, cfg.mc_seed, cfg.mc_workers
        )
        doc["risk_mc_usd"] = mc.total
        doc["risk_mc_stderr"] = mc.stderr
    print(json.dumps(doc, sort_keys=True))
    return 0


def _cmd_scuc(args) -> int:
    cfg = load_config(args.config)
    net, prices = load_case(cfg.case)
    rate = cfg.reserve_rate if args.reserve_rate is None else args.reserve_rate
    uc = solve_scuc(net, prices, ScucConfig(reserve_rate=rate))
    out = Path(args.out) if args.out else cfg.output_dir / "uc.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    uc.write_csv(out)
    print(json.dumps({"out": str(out), "reserve_rate": rate,
                      "committed_unit_hours": int(uc.on.sum())}, sort_keys=True))
    return 0


def _cmd_validate(args) -> int:
    from .grid import evaluate_scenario

    cfg = load_config(args.config)
    net, prices, uc = _load_inputs(cfg)
    boundary = reports.read_boundary_csv(args.boundary, net.n_farms, net.n_periods)
    budgets = UncertaintyBudgets(gamma_t=cfg.gamma_t, gamma_s=cfg.gamma_s)
    fc = net.forecast()
    rng = np.random.default_rng(cfg.mc_seed)
    tol = 1e-5

    vertex_costs = []
    for _ in range(args.vertices):
        vertex = _random_vertex(rng, net.n_farms, net.n_periods, budgets)
        wind = realize_wind(vertex, boundary, fc)
        vertex_costs.append(evaluate_scenario(net, uc, prices, wind).objective)
    interior_costs = []
    em = ErrorModel.from_scale(cfg.sigma, fc, net.capacities())
    for _ in range(args.samples):
        draw = fc + rng.normal(0.0, np.maximum(em.sigma, 1e-12))
        wind = np.clip(draw, boundary.lower, boundary.upper)
        interior_costs.append(evaluate_scenario(net, uc, prices, wind).objective)
    doc = {
        "vertices_checked": len(vertex_costs),
        "vertices_zero_cost": int(sum(c <= tol for c in vertex_costs)),
        "vertex_max_cost_usd": max(vertex_costs, default=0.0),
        "interior_samples": len(interior_costs),
        "interior_zero_cost": int(sum(c <= tol for c in interior_costs)),
        "interior_max_cost_usd": max(interior_costs, default=0.0),
    }
    print(json.dumps(doc, sort_keys=True))
    return 0


def _random_vertex(
    rng: np.random.Generator, m_count: int, t_count: int, budgets: UncertaintyBudgets
) -> UncertaintyVertex:
    vertex = UncertaintyVertex.zero(m_count, t_count)
    for m in range(m_count):
        k = int(rng.integers(0, budgets.gamma_t + 1))
        periods = rng.permutation(t_count)[:k]
        for t in periods:
            used = int(vertex.up[:, t].sum() + vertex.down[:, t].sum())
            if used >= budgets.gamma_s:
                continue
            if rng.random() < 0.5:
                vertex.up[m, t] = 1
            else:
                vertex.down[m, t] = 1
    vertex.validate(budgets)
    return vertex


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    handlers = {
        "assess": _cmd_assess,
        "check": _cmd_check,
        "risk": _cmd_risk,
        "scuc": _cmd_scuc,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, CaseSchemaError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except WindadmitError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
