"""Run configuration: a YAML file with nested sections.

``parse_config``/``serialize_config`` round-trip a :class:`RunConfig`;
``build_problem`` turns one into a solver-ready :class:`Problem` (either the
wind-pair style dynamics/rates sections or a ``ring`` section).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from .errors import ConfigurationError
from .model import Dynamics, Grid, Problem, Rect, Region
from .ring import RingSpec, build_ring_problem

PLANNERS = ("coupled", "uncoupled", "infinite")
SCHEMES = ("euler", "semilag")


@dataclass
class GridConfig:
    h: float = 1.0 / 320
    extent: list = field(default_factory=lambda: [[0.0, 1.0], [0.0, 1.0]])


@dataclass
class RegionConfig:
    obstacles: list = field(default_factory=lambda: [[0.1, 0.1, 0.85, 0.15]])
    target: list = field(default_factory=lambda: [0.5, 0.05])
    target_rects: list = field(default_factory=list)


@dataclass
class DynamicsConfig:
    speed: float = 2.0
    winds: list = field(default_factory=lambda: [[1.5, 0.0], [-1.5, 0.0]])
    cost: float = 1.0


@dataclass
class RatesConfig:
    symmetric: float | None = 1.0
    matrix: list | None = None


@dataclass
class RingConfig:
    enabled: bool = False
    modes: int = 8
    sigma: float = 2.0
    wind_speed: float = 1.5
    speed: float = 2.0


@dataclass
class SolverConfig:
    tolerance: float = 1e-6
    scheme: str = "euler"
    planner: str = "coupled"
    max_sweeps: int = 10000


@dataclass
class SimulationConfig:
    start: list = field(default_factory=lambda: [0.5, 0.8])
    start_mode: int = 0
    real_rate: float | None = None   # symmetric rate; None = problem rates
    runs: int = 200
    dt: float = 1e-3
    seed: int = 12345
    t_max: float = 50.0
    capture_radius: float | None = None
    sample_stride: int = 25


@dataclass
class CompareConfig:
    points: list = field(default_factory=lambda: [[0.5, 0.8]])
    planners: list = field(default_factory=lambda: ["uncoupled", "infinite"])


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    region: RegionConfig = field(default_factory=RegionConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    rates: RatesConfig = field(default_factory=RatesConfig)
    ring: RingConfig = field(default_factory=RingConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    output: str = "out"

    def validate(self) -> "RunConfig":
        if self.grid.h <= 0:
            raise ConfigurationError("grid.h must be positive")
        if self.solver.planner not in PLANNERS:
            raise ConfigurationError(f"solver.planner must be one of {PLANNERS}")
        if self.solver.scheme not in SCHEMES:
            raise ConfigurationError(f"solver.scheme must be one of {SCHEMES}")
        if self.solver.tolerance <= 0:
            raise ConfigurationError("solver.tolerance must be positive")
        if self.dynamics.speed <= 0:
            raise ConfigurationError("dynamics.speed must be positive")
        if self.simulation.dt <= 0 or self.simulation.t_max <= 0:
            raise ConfigurationError("simulation dt and t_max must be positive")
        if self.simulation.runs < 1:
            raise ConfigurationError("simulation.runs must be at least 1")
        for p in self.compare.planners:
            if p not in ("uncoupled", "infinite"):
                raise ConfigurationError(f"compare.planners entries must be uncoupled/infinite, got {p!r}")
        return self


_SECTIONS = {
    "grid": GridConfig, "region": RegionConfig, "dynamics": DynamicsConfig,
    "rates": RatesConfig, "ring": RingConfig, "solver": SolverConfig,
    "simulation": SimulationConfig, "compare": CompareConfig,
}


def parse_config(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"bad YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a mapping of sections")
    cfg = RunConfig()
    for name, cls in _SECTIONS.items():
        sec = raw.get(name)
        if sec is None:
            continue
        if not isinstance(sec, dict):
            raise ConfigurationError(f"section {name!r} must be a mapping")
        known = cls().__dict__
        unknown = set(sec) - set(known)
        if unknown:
            raise ConfigurationError(f"unknown keys in section {name!r}: {sorted(unknown)}")
        setattr(cfg, name, cls(**{**known, **sec}))
    if "output" in raw:
        cfg.output = str(raw["output"])
    extra = set(raw) - set(_SECTIONS) - {"output"}
    if extra:
        raise ConfigurationError(f"unknown config sections: {sorted(extra)}")
    return cfg.validate()


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(cfg: RunConfig) -> str:
    doc = {name: asdict(getattr(cfg, name)) for name in _SECTIONS}
    doc["output"] = cfg.output
    return yaml.safe_dump(doc, sort_keys=True)


def rate_matrix_from(cfg: RunConfig, n_modes: int) -> np.ndarray:
    r = cfg.rates
    if r.matrix is not None:
        return np.asarray(r.matrix, dtype=float)
    lam = 0.0 if r.symmetric is None else float(r.symmetric)
    out = np.full((n_modes, n_modes), lam)
    np.fill_diagonal(out, 0.0)
    return out


def build_region(cfg: RunConfig) -> Region:
    (xlo, xhi), (ylo, yhi) = cfg.grid.extent
    obstacles = tuple(Rect((o[0], o[1]), (o[2], o[3])) for o in cfg.region.obstacles)
    rects = tuple(Rect((t[0], t[1]), (t[2], t[3])) for t in cfg.region.target_rects)
    points = (tuple(cfg.region.target),) if cfg.region.target else ()
    return Region(box=Rect((xlo, ylo), (xhi, yhi)), obstacles=obstacles,
                  target_points=points, target_rects=rects)


def build_problem(cfg: RunConfig) -> Problem:
    region = build_region(cfg)
    if cfg.ring.enabled:
        spec = RingSpec(mode_count=cfg.ring.modes, sigma=cfg.ring.sigma,
                        wind_speed=cfg.ring.wind_speed, rowing_speed=cfg.ring.speed,
                        h=cfg.grid.h, region=region, tol=cfg.solver.tolerance)
        return build_ring_problem(spec)
    (xlo, xhi), (ylo, yhi) = cfg.grid.extent
    grid = Grid.from_bounds((xlo, ylo), (xhi, yhi), cfg.grid.h)
    dyn = Dynamics.constant(cfg.dynamics.speed, cfg.dynamics.winds,
                            cost=cfg.dynamics.cost)
    rates = rate_matrix_from(cfg, dyn.mode_count)
    return Problem.build(grid, region, dyn, rates, terminal_cost=0.0,
                         tol=cfg.solver.tolerance)


def real_rates_from(cfg: RunConfig, problem: Problem) -> np.ndarray:
    if cfg.simulation.real_rate is None:
        return problem.rates
    lam = float(cfg.simulation.real_rate)
    n = problem.mode_count
    out = np.full((n, n), lam)
    np.fill_diagonal(out, 0.0)
    return out
