"""Run configuration loaded from YAML."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .circle_spectral import SpinStructure
from .errors import ConfigurationError
from .flow import INTEGRATORS
from .manifolds import CATALOG
from .oracle import OPERATORS

SCENARIOS = ("validate", "flow", "sweep", "spectrum", "report")


@dataclass
class RunConfig:
    scenario: str
    manifold: str = "round_sphere"
    manifold_params: dict = field(default_factory=dict)
    spin: str = "sigma1"
    n: int = 64
    eps: float | list = 1.0
    dt: float = 1e-2
    t_end: float = 10.0
    integrator: str = "semi_implicit"
    rescaled: bool = True
    initial: dict = field(default_factory=lambda: {"kind": "great_circle"})
    output: str = "runs/out"
    seed: int | None = None
    stationary_tol: float = 1e-6
    monitor_stride: int = 10
    stop_on_stationary: bool = True
    require_convergence: bool = True
    max_snapshots: int = 5
    operator: str = "dirac"
    band_limited: bool = False
    validate_tol: float = 1e-6
    inputs: list = field(default_factory=list)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.manifold not in CATALOG:
            raise ConfigurationError(f"unknown manifold {self.manifold!r}; choose from {', '.join(CATALOG)}")
        if not isinstance(self.manifold_params, dict):
            raise ConfigurationError("manifold_params must be a mapping")
        if self.spin != "both":
            self.spin = SpinStructure.parse(self.spin).value
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 4 or self.n % 2:
            raise ConfigurationError("n must be an even integer >= 4")
        eps = self.eps if isinstance(self.eps, list) else [self.eps]
        if not eps or any(isinstance(e, bool) or not isinstance(e, (int, float)) or e <= 0 for e in eps):
            raise ConfigurationError("eps must be a positive number or a list of them")
        if self.scenario != "sweep" and self.scenario != "validate" and isinstance(self.eps, list):
            raise ConfigurationError(f"scenario {self.scenario} takes a single eps")
        for name in ("dt", "t_end", "stationary_tol", "validate_tol"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                raise ConfigurationError(f"{name} must be a positive number")
        if self.dt >= self.t_end:
            raise ConfigurationError("dt must be smaller than t_end")
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"unknown integrator {self.integrator!r}")
        if self.operator not in OPERATORS:
            raise ConfigurationError(f"unknown operator {self.operator!r}; choose from {', '.join(OPERATORS)}")
        if self.band_limited and self.manifold != "flat_space":
            raise ConfigurationError("band_limited spectra are only defined on flat_space")
        if not isinstance(self.initial, dict) or "kind" not in self.initial:
            raise ConfigurationError("initial must be a mapping with a 'kind' key")
        for name in ("monitor_stride", "max_snapshots"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int)):
            raise ConfigurationError("seed must be an integer")

    @property
    def eps_list(self) -> list[float]:
        return [float(e) for e in (self.eps if isinstance(self.eps, list) else [self.eps])]

    def as_dict(self) -> dict:
        return asdict(self)


def config_from_mapping(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a mapping")
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
    if "scenario" not in data:
        raise ConfigurationError("configuration needs a 'scenario'")
    return RunConfig(**data)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"malformed YAML: {exc}") from None
    return config_from_mapping(data)
