"""
Run configuration read from a TOML file.
Every table rejects unknown keys so a typo in a parameter name fails loudly.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from disequilibrium.core.errors import ConfigError
from disequilibrium.core.models import PARAM_KEYS, ModelParams, validate_params
from disequilibrium.economy.dynamics import InitialCondition
from disequilibrium.economy.experiments import SweepSpec
from disequilibrium.economy.welfare import FigureTwoSpec, OmegaSpec


class SimulationSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_agents: int = Field(default=10_000, ge=2)
    horizon: int = Field(default=5_000, gt=0)
    burn_in: int = Field(default=1_000, ge=0)


class SeedSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    master_seed: int = Field(default=42, ge=0, lt=2**64)


class OutputSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    path: Optional[str] = None
    format: Literal["csv"] = "csv"


class SweepSection(BaseModel):
    """Grids for the sweep; a missing grid falls back to the [model] value."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rho: Optional[List[float]] = None
    sigma_eps: Optional[List[float]] = None
    alpha: Optional[List[float]] = None
    sigma_nu: Optional[List[float]] = None
    sigma_eta: Optional[List[float]] = None
    gamma: Optional[List[float]] = None
    replications: int = Field(default=1, ge=1)


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: ModelParams
    omega: OmegaSpec = OmegaSpec()
    simulation: SimulationSection = SimulationSection()
    seed: SeedSection = SeedSection()
    output: OutputSection = OutputSection()
    initial: InitialCondition = InitialCondition()
    tradeoff: FigureTwoSpec = FigureTwoSpec()
    sweep: Optional[SweepSection] = None

    def with_overrides(
        self,
        master_seed: Optional[int] = None,
        output_path: Optional[str] = None,
    ) -> "RunConfig":
        """Apply command-line flags on top of the file values."""
        update = {}
        if master_seed is not None:
            update["seed"] = SeedSection(master_seed=master_seed)
        if output_path is not None:
            update["output"] = self.output.model_copy(update={"path": output_path})
        return self.model_copy(update=update)

    def sweep_spec(self) -> SweepSpec:
        if self.sweep is None:
            raise ConfigError("config has no [sweep] table", key="sweep")
        grids = {
            key: getattr(self.sweep, key) if getattr(self.sweep, key) is not None else [getattr(self.model, key)]
            for key in PARAM_KEYS
        }
        try:
            return SweepSpec(
                **grids,
                omega=self.omega,
                n_agents=self.simulation.n_agents,
                horizon=self.simulation.horizon,
                burn_in=self.simulation.burn_in,
                replications=self.sweep.replications,
                master_seed=self.seed.master_seed,
            )
        except ValidationError as e:
            raise _as_config_error(e, prefix="sweep") from e


def _as_config_error(error: ValidationError, prefix: str = "") -> ConfigError:
    first = error.errors()[0]
    loc = [str(part) for part in first["loc"]]
    key = ".".join(([prefix] if prefix else []) + loc) or prefix or "config"
    return ConfigError(first["msg"], key=key)


def parse_run_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}") from e
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise _as_config_error(e) from e
    validate_params(config.model)
    return config


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a TOML run configuration."""
    target = Path(path)
    if not target.is_file():
        raise ConfigError(f"config file not found: {target}", key="--config")
    return parse_run_config(target.read_text(encoding="utf-8"))
