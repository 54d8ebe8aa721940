"""Result emission: boundary CSV, per-period risk CSV, iteration log,
summary JSON, and sweep tables.

Every value written comes straight from a module result; nothing is
computed here.  Floats are rendered with ``repr`` (shortest round-trip
form), and JSON keys are sorted, so reports are byte-stable across runs.
The iteration log carries wall-clock times and is the one diagnostic
file exempt from byte stability.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .assessment import AssessmentResult
from .errors import CaseSchemaError, DimensionMismatchError
from .uncertainty import AdmissibilityBoundary


def _f(v) -> str:
    return repr(float(v))


def write_boundary_csv(
    path: Path,
    boundary: AdmissibilityBoundary,
    q_p: np.ndarray | None = None,
    q_n: np.ndarray | None = None,
) -> None:
    m_count, t_count = boundary.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["period", "farm", "w_lower_mw", "w_upper_mw", "q_p", "q_n"])
        for t in range(t_count):
            for m in range(m_count):
                row = [t + 1, m + 1, _f(boundary.lower[m, t]), _f(boundary.upper[m, t])]
                row.append(_f(q_p[m, t]) if q_p is not None else "")
                row.append(_f(q_n[m, t]) if q_n is not None else "")
                w.writerow(row)


def read_boundary_csv(path: str | Path, n_farms: int, n_periods: int) -> AdmissibilityBoundary:
    lower = np.full((n_farms, n_periods), np.nan)
    upper = np.full((n_farms, n_periods), np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"period", "farm", "w_lower_mw", "w_upper_mw"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise CaseSchemaError(
                f"boundary CSV must carry columns {sorted(need)} (got {reader.fieldnames})"
            )
        for row in reader:
            t = int(row["period"]) - 1
            m = int(row["farm"]) - 1
            if not (0 <= t < n_periods and 0 <= m < n_farms):
                raise DimensionMismatchError(
                    f"boundary row references farm {m + 1}, period {t + 1}"
                )
            lower[m, t] = float(row["w_lower_mw"])
            upper[m, t] = float(row["w_upper_mw"])
    if np.isnan(lower).any() or np.isnan(upper).any():
        raise DimensionMismatchError("boundary CSV does not cover every (farm, period)")
    return AdmissibilityBoundary(lower=lower, upper=upper)


def emit_reports(result: AssessmentResult, out_dir: str | Path) -> dict[str, Path]:
    """Write the result artifacts; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    paths["boundary"] = out / "boundary.csv"
    write_boundary_csv(paths["boundary"], result.boundary, result.risk.q_p, result.risk.q_n)

    paths["risk_by_period"] = out / "risk_by_period.csv"
    per_period = result.risk.q_p.sum(axis=0) + result.risk.q_n.sum(axis=0)
    with open(paths["risk_by_period"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["period", "risk_usd"])
        for t, val in enumerate(per_period):
            w.writerow([t + 1, _f(val)])

    paths["iterations"] = out / "iterations.ndjson"
    with open(paths["iterations"], "w") as fh:
        for rec in result.iterations:
            fh.write(json.dumps({
                "k": rec.k,
                "G_k": float(rec.g),
                "F_R_k": float(rec.f_r),
                "eta": float(rec.eta),
                "master_rows": rec.master_rows,
                "wall_ms": float(rec.wall_ms),
            }, sort_keys=True) + "\n")

    paths["summary"] = out / "summary.json"
    summary = {
        "status": result.status,
        "risk_pla_usd": float(result.g),
        "risk_exact_usd": float(result.risk_exact_value.total),
        "eta": float(result.eta),
        "worst_case_cost_usd": float(result.worst_cost),
        "iterations": len(result.iterations),
        "c_loss": float(result.config.c_loss),
        "penalty": float(result.config.penalty),
        "epsilon": float(result.config.epsilon),
        "feasibility_cuts": bool(result.config.feasibility_cuts),
    }
    with open(paths["summary"], "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return paths


def emit_sweep(rows: list[tuple], header: tuple[str, str], path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(header))
        for key, val in rows:
            w.writerow([key if isinstance(key, int) else _f(key), _f(val)])
    return path
