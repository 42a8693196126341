"""
Domain types shared by the simulation and analytical layers.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from disequilibrium.core.errors import ConfigError, DomainError
from disequilibrium.core.rng import SeedSpec

PARAM_KEYS = ("rho", "sigma_eps", "alpha", "sigma_nu", "sigma_eta", "gamma")


class ModelParams(BaseModel):
    """Structural parameters of the economy.

    Construction only checks types; the economic constraints are enforced by
    `validate_params`, which every entry point calls before computing.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rho: float = Field(allow_inf_nan=False)
    sigma_eps: float = Field(allow_inf_nan=False)
    alpha: float = Field(allow_inf_nan=False)
    sigma_nu: float = Field(allow_inf_nan=False)
    sigma_eta: float = Field(allow_inf_nan=False)
    gamma: float = Field(allow_inf_nan=False)

    def replace(self, **changes: float) -> "ModelParams":
        return self.model_copy(update=changes)

    def as_row(self) -> Dict[str, float]:
        return {key: getattr(self, key) for key in PARAM_KEYS}


def validate_params(p: ModelParams) -> ModelParams:
    """Return `p` unchanged if every model constraint holds, else raise DomainError.

    Every check is written so that NaN fails it; `replace` bypasses pydantic's
    finiteness check, so this is the only guard on derived parameters.
    """
    if not abs(p.rho) < 1:
        raise DomainError("rho", f"persistence must satisfy |rho| < 1, got {p.rho}")
    if not 0 < p.alpha < 2:
        # 2*alpha - alpha**2 vanishes at both endpoints
        raise DomainError("alpha", f"adjustment speed must lie in the open interval (0, 2), got {p.alpha}")
    if not (math.isfinite(p.sigma_eps) and p.sigma_eps > 0):
        raise DomainError("sigma_eps", f"fundamental innovation std-dev must be finite and > 0, got {p.sigma_eps}")
    if not (math.isfinite(p.sigma_nu) and p.sigma_nu >= 0):
        raise DomainError("sigma_nu", f"signal noise std-dev must be finite and >= 0, got {p.sigma_nu}")
    if not (math.isfinite(p.sigma_eta) and p.sigma_eta >= 0):
        raise DomainError("sigma_eta", f"behavioral noise std-dev must be finite and >= 0, got {p.sigma_eta}")
    if not (math.isfinite(p.gamma) and p.gamma > 0):
        raise DomainError("gamma", f"exploration weight must be finite and > 0, got {p.gamma}")
    return p


def load_params_table(table: Mapping[str, Any]) -> ModelParams:
    """Parse a flat TOML table with exactly the ModelParams keys and validate it."""
    try:
        params = ModelParams.model_validate(dict(table))
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or "model"
        raise ConfigError(first["msg"], key=key) from e
    return validate_params(params)


def params_to_toml(p: ModelParams, table: str = "model") -> str:
    lines = [f"[{table}]"] + [f"{key} = {getattr(p, key)!r}" for key in PARAM_KEYS]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MomentState:
    theta: float
    m: float
    v: float

    def __post_init__(self):
        if self.v < 0 or math.isnan(self.v):
            raise DomainError("v", f"cross-sectional variance must be >= 0, got {self.v}")


@dataclass
class PanelState:
    """Finite panel of agents at the start of period `time`.

    Actions are the beliefs themselves, so no separate action vector is kept.
    The generator state is the pair of seeds plus `time`: every draw is
    addressed by (seed, shock, period, agent), never by a mutable cursor.
    """

    beliefs: np.ndarray
    theta: float
    time: int
    seed: SeedSpec
    fundamental_seed: SeedSpec = field(default=None)

    def __post_init__(self):
        self.beliefs = np.asarray(self.beliefs, dtype=np.float64)
        if self.beliefs.ndim != 1:
            raise DomainError("beliefs", "belief vector must be one-dimensional")
        if self.fundamental_seed is None:
            self.fundamental_seed = self.seed

    @property
    def n_agents(self) -> int:
        return int(self.beliefs.shape[0])

    @property
    def actions(self) -> np.ndarray:
        return self.beliefs
