"""Simulation configuration: dataclasses plus a strict YAML loader.

The file carries five blocks (``mesh``, ``models``, ``scheme``, ``run``,
``relaxation``); unknown keys anywhere are rejected.  Elastic material data
may be given either as wave speeds (``c1``, ``c2``) or as Lame constants
(``mu``, ``lam``), not both.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .models import ElasticParams, FluidParams

SCENARIOS = ("cavitation", "equilibrium", "gaussian_pulse")


@dataclass
class MeshConfig:
    domain1: tuple
    domain2: tuple
    nx1: int
    ny1: int
    nx2: int
    ny2: int


@dataclass
class ModelConfig:
    rho_s: float
    gamma: float
    pi: float = 0.0
    c1: float | None = None
    c2: float | None = None
    mu: float | None = None
    lam: float | None = None

    def elastic_params(self):
        if self.c1 is not None and self.c2 is not None:
            if self.mu is not None or self.lam is not None:
                raise ConfigError("give either (c1, c2) or (mu, lam), not both")
            return ElasticParams(self.rho_s, self.c1, self.c2)
        if self.mu is not None and self.lam is not None:
            return ElasticParams.from_lame(self.rho_s, self.mu, self.lam)
        raise ConfigError("elastic material needs (c1, c2) or (mu, lam)")

    def fluid_params(self):
        return FluidParams(self.gamma, self.pi)


@dataclass
class SchemeConfig:
    p: int = 3
    ssp_order: int = 3
    cfl: float = 0.7
    tvb_m: float = 50.0
    limiter: bool = True
    speed_mode: str = "local"
    interface_safety: float = 1.0
    boundary: str = "outflow"


@dataclass
class RunConfig:
    scenario: str
    t_end: float
    snapshot_interval: float | None = None
    output_dir: str | None = None
    label: str = "run"
    fixed_dt: float | None = None
    scenario_params: dict = field(default_factory=dict)


@dataclass
class RelaxationConfig:
    enabled: bool = False
    epsilon: float = 1e-6
    imex_pair: str = "ssp2_222"


@dataclass
class SimConfig:
    mesh: MeshConfig
    models: ModelConfig
    scheme: SchemeConfig
    run: RunConfig
    relaxation: RelaxationConfig = field(default_factory=RelaxationConfig)


def _build(cls, block, name):
    if not isinstance(block, dict):
        raise ConfigError(f"config block {name!r} must be a mapping")
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(block) - fields
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    required = {f.name for f in dataclasses.fields(cls)
                if f.default is dataclasses.MISSING
                and f.default_factory is dataclasses.MISSING}
    missing = required - set(block)
    if missing:
        raise ConfigError(f"missing keys in {name!r}: {sorted(missing)}")
    return cls(**block)


def parse_config(data):
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    known = {"mesh", "models", "scheme", "run", "relaxation"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level blocks: {sorted(unknown)}")
    for block in ("mesh", "models", "run"):
        if block not in data:
            raise ConfigError(f"missing config block {block!r}")
    cfg = SimConfig(
        mesh=_build(MeshConfig, data["mesh"], "mesh"),
        models=_build(ModelConfig, data["models"], "models"),
        scheme=_build(SchemeConfig, data.get("scheme", {}), "scheme"),
        run=_build(RunConfig, data["run"], "run"),
        relaxation=_build(RelaxationConfig, data.get("relaxation", {}),
                          "relaxation"),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    m = cfg.mesh
    for n in (m.nx1, m.ny1, m.nx2, m.ny2):
        if n < 1:
            raise ConfigError("cell counts must be positive")
    cfg.models.elastic_params()
    cfg.models.fluid_params()
    s = cfg.scheme
    if s.p < 1:
        raise ConfigError("polynomial parameter p must be >= 1")
    if not 0.0 < s.cfl <= 1.0:
        raise ConfigError("cfl must lie in (0, 1]")
    if s.ssp_order not in (1, 2, 3):
        raise ConfigError("ssp_order must be 1, 2 or 3")
    if s.speed_mode not in ("local", "global"):
        raise ConfigError(f"unknown speed_mode {s.speed_mode!r}")
    if s.boundary not in ("outflow", "reflective"):
        raise ConfigError(f"unknown boundary policy {s.boundary!r}")
    if s.tvb_m < 0.0:
        raise ConfigError("tvb_m must be nonnegative")
    if s.interface_safety < 1.0:
        raise ConfigError("interface_safety must be >= 1")
    r = cfg.run
    if r.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {r.scenario!r}; "
                          f"known: {SCENARIOS}")
    if not (r.t_end > 0.0 and math.isfinite(r.t_end)):
        raise ConfigError("t_end must be positive")
    if r.snapshot_interval is not None and r.snapshot_interval <= 0.0:
        raise ConfigError("snapshot_interval must be positive or omitted")
    if r.fixed_dt is not None and r.fixed_dt <= 0.0:
        raise ConfigError("fixed_dt must be positive or omitted")
    x = cfg.relaxation
    if x.epsilon <= 0.0:
        raise ConfigError("epsilon must be positive")
    from .timestepping import IMEX_TABLES
    if x.imex_pair not in IMEX_TABLES:
        raise ConfigError(f"unknown IMEX pair {x.imex_pair!r}; "
                          f"known: {sorted(IMEX_TABLES)}")
    return cfg


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    cfg = parse_config(data)
    # YAML lists become Python lists; normalize domains to tuples
    cfg.mesh.domain1 = tuple(cfg.mesh.domain1)
    cfg.mesh.domain2 = tuple(cfg.mesh.domain2)
    return cfg
