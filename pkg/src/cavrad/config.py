"""Versioned run-configuration documents.

A run is fully described by a JSON document with a schema_version field;
unknown fields are rejected at every level so that typos fail loudly
instead of silently using defaults.  Serialization is canonical (sorted
keys, fixed separators), which makes serialize/deserialize round trips
byte-identical and lets reproducibility audits diff configs textually.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

from .iteration import CavityConfig
from .quadrature import GridSpec
from .single_mirror import SingleMirrorConfig
from .specfun import SeriesControl

SCHEMA_VERSION = 1

COMMANDS = ("energy-density", "spectrum", "energy", "sweep", "verify")


@dataclass
class PhysicsSpec:
    """Raw physics inputs; exactly one of alpha/alpha_eff and one of
    r/rho/(R1 and R2) must be given for cavity systems."""

    system: str = "cavity"
    K: int = 1
    Omega: float = 1.0
    alpha: Optional[float] = None
    alpha_eff: Optional[float] = None
    r: Optional[float] = None
    rho: Optional[float] = None
    R1: Optional[float] = None
    R2: Optional[float] = None
    R: Optional[float] = None  # single-mirror reflectivity

    def cavity(self) -> CavityConfig:
        if (self.alpha is None) == (self.alpha_eff is None):
            raise ValueError("exactly one of alpha or alpha_eff is required")
        if self.R1 is not None or self.R2 is not None:
            if self.R1 is None or self.R2 is None or self.r is not None or self.rho is not None:
                raise ValueError("give either both R1 and R2, or one of r/rho")
            R1, R2 = self.R1, self.R2
            rho = -0.5 * math.log(math.sqrt(R1 * R2))
        else:
            if (self.r is None) == (self.rho is None):
                raise ValueError("exactly one of r or rho is required")
            rho = self.rho if self.rho is not None else -0.5 * math.log(self.r)
            R1 = R2 = math.exp(-2.0 * rho)
        alpha = self.alpha if self.alpha is not None else 0.5 * self.alpha_eff * rho
        return CavityConfig(K=self.K, alpha=alpha, R1=R1, R2=R2, Omega=self.Omega)

    def single(self) -> SingleMirrorConfig:
        if self.alpha is None:
            raise ValueError("single-mirror runs need alpha")
        return SingleMirrorConfig(R=self.R if self.R is not None else 1.0,
                                  alpha=self.alpha, Omega=self.Omega)


@dataclass
class OptionsSpec:
    points: int = 3000
    nu_max: float = 3.0
    envelope: bool = False
    denominators: str = "static"
    direction: str = "right"
    threads: Optional[int] = None
    alphas: Optional[Sequence[float]] = None
    alpha_ratios: Optional[Sequence[float]] = None
    rhos: Optional[Sequence[float]] = None
    Ks: Optional[Sequence[int]] = None


@dataclass
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"
    figure: Optional[str] = None


@dataclass
class RunConfig:
    command: str
    physics: PhysicsSpec = field(default_factory=PhysicsSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    series: SeriesControl = field(default_factory=SeriesControl)
    options: OptionsSpec = field(default_factory=OptionsSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; expected one of {COMMANDS}")


def _build(cls, data: dict, where: str):
    allowed = set(cls.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown field(s) {sorted(unknown)} in {where}")
    return cls(**data)


def deserialize(text: str) -> RunConfig:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("config document must be a JSON object")
    version = doc.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ValueError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    known = {"command", "physics", "grid", "series", "options", "output"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown top-level field(s) {sorted(unknown)}")
    if "command" not in doc:
        raise ValueError("config document needs a command")
    kwargs = {"command": doc["command"]}
    for name, cls in (("physics", PhysicsSpec), ("grid", GridSpec),
                      ("series", SeriesControl), ("options", OptionsSpec),
                      ("output", OutputSpec)):
        if name in doc:
            raw = doc[name]
            if not isinstance(raw, dict):
                raise ValueError(f"{name} must be a JSON object")
            if name == "grid" and "eps_levels" in raw:
                raw = dict(raw, eps_levels=tuple(raw["eps_levels"]))
            kwargs[name] = _build(cls, raw, name)
    return RunConfig(**kwargs)


def serialize(cfg: RunConfig) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "physics": asdict(cfg.physics),
        "grid": {"points_per_period": cfg.grid.points_per_period,
                 "eps_levels": list(cfg.grid.eps_levels)},
        "series": asdict(cfg.series),
        "options": {k: (list(v) if isinstance(v, (tuple, list)) else v)
                    for k, v in asdict(cfg.options).items()},
        "output": asdict(cfg.output),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
