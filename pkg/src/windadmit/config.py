"""Run configuration: a small TOML file naming the inputs and knobs.

Paths are resolved relative to the configuration file's directory.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .risk import DEFAULT_ALPHAS, DEFAULT_Z


@dataclass
class RunConfig:
    case: Path
    uc: Path | None
    output_dir: Path
    mode: str = "a1"  # a1: blocks+cuts+penalty, a2: k=0, a3: no feasibility cuts
    sigma: float = 0.10
    gamma_t: int = 8
    gamma_s: int = 1
    c_loss: float = 0.0
    k: float = 100.0
    epsilon: float = 1e-3
    max_iterations: int = 100
    m_big: float | None = None
    pla_alphas: tuple[float, ...] = DEFAULT_ALPHAS
    pla_z: int = DEFAULT_Z
    quadrature_tol: float = 1e-6
    mc_samples: int = 1_000_000
    mc_seed: int = 20240601
    mc_workers: int = 1
    sweep_sigmas: tuple[float, ...] = ()
    sweep_gamma_ts: tuple[int, ...] = ()
    reserve_rate: float = 0.05

    def validate(self) -> None:
        if self.mode not in ("a1", "a2", "a3"):
            raise ConfigError(f"mode must be a1, a2 or a3 (got {self.mode!r})")
        if not self.case.exists():
            raise ConfigError(f"case file not found: {self.case}")
        if self.uc is not None and not self.uc.exists():
            raise ConfigError(f"UC schedule not found: {self.uc}")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.gamma_t < 0 or self.gamma_s < 0:
            raise ConfigError("budgets must be nonnegative")
        if self.c_loss < 0:
            raise ConfigError("c_loss must be nonnegative")
        if self.k < 0:
            raise ConfigError("k must be nonnegative")
        if self.mc_samples < 1 or self.mc_workers < 1:
            raise ConfigError("mc.samples and mc.workers must be positive")

    @property
    def penalty(self) -> float:
        return 0.0 if self.mode == "a2" else self.k

    @property
    def feasibility_cuts(self) -> bool:
        return self.mode != "a3"


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    base = path.parent

    def as_path(key: str, required: bool = True) -> Path | None:
        if key not in doc:
            if required:
                raise ConfigError(f"{path} is missing required key {key!r}")
            return None
        return (base / str(doc[key])).resolve()

    pla = doc.get("pla", {})
    quad = doc.get("quadrature", {})
    mc = doc.get("mc", {})
    sweep = doc.get("sweep", {})
    cfg = RunConfig(
        case=as_path("case"),
        uc=as_path("uc", required=False),
        output_dir=(base / str(doc.get("output_dir", "out"))).resolve(),
        mode=str(doc.get("mode", "a1")),
        sigma=float(doc.get("sigma", 0.10)),
        gamma_t=int(doc.get("gamma_t", 8)),
        gamma_s=int(doc.get("gamma_s", 1)),
        c_loss=float(doc.get("c_loss", 0.0)),
        k=float(doc.get("k", 100.0)),
        epsilon=float(doc.get("epsilon", 1e-3)),
        max_iterations=int(doc.get("max_iterations", 100)),
        m_big=float(doc["m_big"]) if "m_big" in doc else None,
        pla_alphas=tuple(float(a) for a in pla.get("alphas", DEFAULT_ALPHAS)),
        pla_z=int(pla.get("z", DEFAULT_Z)),
        quadrature_tol=float(quad.get("tol", 1e-6)),
        mc_samples=int(mc.get("samples", 1_000_000)),
        mc_seed=int(mc.get("seed", 20240601)),
        mc_workers=int(mc.get("workers", 1)),
        sweep_sigmas=tuple(float(s) for s in sweep.get("sigmas", ())),
        sweep_gamma_ts=tuple(int(g) for g in sweep.get("gamma_ts", ())),
        reserve_rate=float(doc.get("reserve_rate", 0.05)),
    )
    cfg.validate()
    return cfg
