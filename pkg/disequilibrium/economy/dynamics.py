"""
Finite-N Monte Carlo panel engine.

Within period t agents act on beliefs formed at the end of t-1, are paid
against theta_t, observe a private signal about theta_t and update; the
fundamental then advances to theta_{t+1}.
"""

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from disequilibrium.core.errors import ConfigError
from disequilibrium.core.models import ModelParams, PanelState, validate_params
from disequilibrium.core.rng import RngState, SeedSpec, Shock, draw_normals, gaussian_draw

logger = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ["time", "theta", "mean_belief", "var_belief", "mean_payoff"]
DEFAULT_BURN_IN = 1000


class InitialCondition(BaseModel):
    """Initial beliefs ~ N(belief_mean, belief_var) and the starting fundamental."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    belief_mean: float = Field(default=0.0, allow_inf_nan=False)
    belief_var: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    theta0: float = Field(default=0.0, allow_inf_nan=False)


@dataclass(frozen=True)
class PanelSnapshot:
    time: int
    theta: float
    mean_belief: float
    var_belief: float
    mean_payoff: float

    @property
    def mean_sq_deviation(self) -> float:
        return -self.mean_payoff


@dataclass(frozen=True)
class PanelAverages:
    var_belief: float
    mean_sq_deviation: float
    mean_payoff: float
    periods: int


# ============================================================================
# ONE-PERIOD UPDATES
# ============================================================================

def step_fundamental(theta: float, p: ModelParams, rng: RngState) -> Tuple[float, RngState]:
    eps, rng = gaussian_draw(rng, 0.0, p.sigma_eps)
    return p.rho * theta + eps, rng


def step_panel(state: PanelState, p: ModelParams, executor: Optional[Executor] = None) -> PanelState:
    """Advance every agent's belief by one period, then the fundamental."""
    t, n = state.time, state.n_agents

    nu = draw_normals(state.seed, Shock.SIGNAL, t, n, executor)
    eta = draw_normals(state.seed, Shock.BEHAVIORAL, t + 1, n, executor)

    signals = state.theta + p.sigma_nu * nu
    beliefs = (1 - p.alpha) * state.beliefs + p.alpha * signals + p.sigma_eta * eta

    theta_next, _ = step_fundamental(
        state.theta, p, RngState.at(state.fundamental_seed, Shock.FUNDAMENTAL, t + 1)
    )
    return PanelState(
        beliefs=beliefs,
        theta=theta_next,
        time=t + 1,
        seed=state.seed,
        fundamental_seed=state.fundamental_seed,
    )


def snapshot(state: PanelState) -> PanelSnapshot:
    beliefs = state.beliefs
    deviation = beliefs - state.theta
    return PanelSnapshot(
        time=state.time,
        theta=float(state.theta),
        mean_belief=float(beliefs.mean()),
        var_belief=float(beliefs.var()),
        mean_payoff=-float(np.mean(deviation * deviation)),
    )


# ============================================================================
# RUNS
# ============================================================================

@contextmanager
def worker_pool(workers: int) -> Iterator[Optional[Executor]]:
    if workers <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=workers) as executor:
        yield executor


def initial_panel(
    n_agents: int,
    seed: SeedSpec,
    init: Optional[InitialCondition] = None,
    fundamental_seed: Optional[SeedSpec] = None,
) -> PanelState:
    init = init or InitialCondition()
    z = draw_normals(seed, Shock.INITIAL, 0, n_agents)
    beliefs = init.belief_mean + np.sqrt(init.belief_var) * z
    return PanelState(
        beliefs=beliefs,
        theta=init.theta0,
        time=0,
        seed=seed,
        fundamental_seed=fundamental_seed or seed,
    )


def run_panel(
    p: ModelParams,
    n_agents: int,
    horizon: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: Optional[SeedSpec] = None,
    init: Optional[InitialCondition] = None,
    fundamental_seed: Optional[SeedSpec] = None,
    workers: int = 1,
) -> List[PanelSnapshot]:
    """
    Simulate a panel for `horizon` periods and return the snapshots taken at
    periods burn_in..horizon-1.

    Raises:
        ConfigError: if horizon <= burn_in, burn_in < 0 or n_agents < 2
    """
    validate_params(p)
    if n_agents < 2:
        raise ConfigError(f"need at least 2 agents, got {n_agents}", key="n_agents")
    if burn_in < 0:
        raise ConfigError(f"burn_in must be >= 0, got {burn_in}", key="burn_in")
    if horizon <= burn_in:
        raise ConfigError(f"horizon ({horizon}) must exceed burn_in ({burn_in})", key="horizon")

    seed = seed or SeedSpec()
    state = initial_panel(n_agents, seed, init, fundamental_seed)
    snapshots: List[PanelSnapshot] = []

    logger.debug(f"Running panel: N={n_agents}, horizon={horizon}, burn_in={burn_in}, seed={seed}")
    with worker_pool(workers) as executor:
        for t in range(horizon):
            if t >= burn_in:
                snapshots.append(snapshot(state))
            if t < horizon - 1:
                state = step_panel(state, p, executor)
    return snapshots


def snapshots_frame(snapshots: Sequence[PanelSnapshot]) -> pd.DataFrame:
    return pd.DataFrame(
        {column: [getattr(s, column) for s in snapshots] for column in SNAPSHOT_COLUMNS},
        columns=SNAPSHOT_COLUMNS,
    )


def time_average(snapshots: Sequence[PanelSnapshot]) -> PanelAverages:
    if not snapshots:
        raise ConfigError("cannot average an empty snapshot sequence", key="snapshots")
    var_belief = np.array([s.var_belief for s in snapshots])
    payoff = np.array([s.mean_payoff for s in snapshots])
    return PanelAverages(
        var_belief=float(var_belief.mean()),
        mean_sq_deviation=float(-payoff.mean()),
        mean_payoff=float(payoff.mean()),
        periods=len(snapshots),
    )
