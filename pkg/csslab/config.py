"""Run configuration: `key = value` files validated by pydantic models."""

import logging
import os
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from csslab.evolver import EvolverConfig
from csslab.radial import RadialGrid
from csslab.radiation import RadiationSpec

logger = logging.getLogger(__name__)

ENV_PREFIX = "CSSLAB_"


class ConfigError(Exception):
    """Raised for unreadable, unknown or invalid configuration entries."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Section):
    n: int = Field(4096, ge=64, description="number of radii")
    r_max: float = Field(100.0, gt=0, description="outer radius")
    kind: Literal["log", "uniform"] = Field("log", description="spacing of the radii")

    def build(self) -> RadialGrid:
        if self.kind == "log":
            return RadialGrid.log_uniform(self.n, self.r_max)
        return RadialGrid.uniform(self.n, self.r_max)


class SpecConfig(_Section):
    q_re: float = 1.0
    q_im: float = 0.0
    nu_re: float = Field(2.0, gt=0)
    nu_im: float = 0.0

    @property
    def q(self) -> complex:
        return complex(self.q_re, self.q_im)

    @property
    def nu(self) -> complex:
        return complex(self.nu_re, self.nu_im)

    def build(self) -> RadiationSpec:
        return RadiationSpec(q=self.q, nu=self.nu)


class TimeConfig(_Section):
    tau: float = Field(-0.1, lt=0, description="initial time of the blow-up experiment")
    window: float = Field(0.075, gt=0, description="length of the evolution window")

    @model_validator(mode="after")
    def _window_inside(self) -> "TimeConfig":
        if self.window >= abs(self.tau):
            raise ValueError("time.window must be smaller than |time.tau|")
        return self


class SolverConfig(_Section):
    dt_max: float = Field(1e-4, gt=0)
    c_cfl: float = Field(0.1, gt=0, le=1)
    monitor_stride: int = Field(200, ge=1)
    sponge: float = Field(20.0, ge=0)
    check_budget: bool = Field(True, description="abort when mass or energy drift leaves its budget")


class ModulationConfig(_Section):
    avg_lo: float = 0.2
    avg_hi: float = 0.1

    @model_validator(mode="after")
    def _ordered(self) -> "ModulationConfig":
        if not 0 < self.avg_hi < self.avg_lo < 0.25:
            raise ValueError("need 0 < modulation.avg_hi < modulation.avg_lo < 1/4")
        return self


def _default_out_dir() -> Path:
    return Path(os.environ.get(f"{ENV_PREFIX}OUT_DIR", "out"))


class OutConfig(_Section):
    dir: Path = Field(default_factory=_default_out_dir)


class RunConfig(_Section):
    grid: GridConfig = Field(default_factory=GridConfig)
    spec: SpecConfig = Field(default_factory=SpecConfig)
    time: TimeConfig = Field(default_factory=TimeConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    modulation: ModulationConfig = Field(default_factory=ModulationConfig)
    out: OutConfig = Field(default_factory=OutConfig)

    def evolver(self, **kwargs) -> EvolverConfig:
        return EvolverConfig(
            dt_max=self.solver.dt_max,
            c_cfl=self.solver.c_cfl,
            monitor_stride=self.solver.monitor_stride,
            sponge=self.solver.sponge,
            check_budget=self.solver.check_budget,
            **kwargs,
        )

    def summary(self) -> dict:
        """JSON-ready view without the output directory, so summaries do not depend on where they are written."""
        return self.model_dump(mode="json", exclude={"out"})


def parse_assignments(lines: list[str], source: str = "<config>") -> dict:
    """Parse `section.key = value` lines into a nested dict; `#` starts a comment."""
    tree: dict[str, dict[str, str]] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        section, _, name = key.partition(".")
        if not name:
            raise ConfigError(f"{source}:{number}: key {key!r} must be 'section.name'")
        if section not in RunConfig.model_fields:
            raise ConfigError(f"{source}:{number}: unknown section {section!r}")
        tree.setdefault(section, {})[name] = value
    return tree


def load_config(path: Path | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Read `path` (if any), apply `--set` overrides and validate.

    Raises:
        ConfigError: On parse errors, unknown keys or invalid values
    """
    tree: dict[str, dict[str, str]] = {}
    if path is not None:
        try:
            text = path.read_text()
        except OSError as err:
            raise ConfigError(f"cannot read {path}: {err}") from err
        tree = parse_assignments(text.splitlines(), str(path))
    for section, values in parse_assignments(overrides or [], "--set").items():
        tree.setdefault(section, {}).update(values)
    try:
        config = RunConfig.model_validate(tree)
    except ValidationError as err:
        raise ConfigError(str(err)) from err
    logger.debug(f"Loaded configuration: {config.summary()}")
    return config


def log_level() -> str:
    return os.environ.get(f"{ENV_PREFIX}LOG_LEVEL", "WARNING").upper()


def workers() -> int | None:
    value = os.environ.get(f"{ENV_PREFIX}WORKERS")
    return int(value) if value else None
