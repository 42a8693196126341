"""
Command handlers behind the CLI. Each handler turns a RunConfig plus flags
into one CSV table; errors propagate to the entry point, which maps them to
exit codes.
"""

import logging
import math
import sys
from typing import List, Optional, Sequence, TextIO

import numpy as np
import pandas as pd

from disequilibrium.api.schemas import RunConfig
from disequilibrium.core.errors import ConfigError, Infeasible, NoInteriorOptimum, NonConcave
from disequilibrium.core.rng import SeedSpec
from disequilibrium.economy import experiments
from disequilibrium.economy.dynamics import run_panel, snapshots_frame, time_average
from disequilibrium.economy.export import format_float, write_csv
from disequilibrium.economy.moments import (
    STEADY_STATE_COLUMNS,
    dispersion_half_life,
    equilibrium_variance,
    stationary_joint_moments,
    steady_state_variance,
)
from disequilibrium.economy.welfare import (
    FigureTwoSpec,
    figure_two_curve,
    implied_noise,
    optimal_dispersion,
    policy_surface,
    welfare_curve,
    welfare_path,
)

logger = logging.getLogger(__name__)


def notice(message: str) -> None:
    """User-facing status line on stderr; stdout is reserved for CSV."""
    print(message, file=sys.stderr)


def parse_grid(text: str, flag: str) -> List[float]:
    """Parse a comma-separated list of numbers such as "0.1,0.3,0.5"."""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"malformed grid {text!r}: {e}", key=flag) from e
    if not values:
        raise ConfigError("grid is empty", key=flag)
    bad = [value for value in values if not math.isfinite(value)]
    if bad:
        raise ConfigError(f"grid values must be finite, got {bad}", key=flag)
    return values


def cmd_steady_state(config: RunConfig, out: Optional[TextIO] = None) -> None:
    steady = stationary_joint_moments(config.model)
    frame = pd.DataFrame([steady.to_row()], columns=STEADY_STATE_COLUMNS)
    write_csv(frame, config.output.path, out)


def cmd_simulate(config: RunConfig, workers: int = 1, out: Optional[TextIO] = None) -> None:
    """Simulated panel trajectories; these are model output, not a stylised chart."""
    sim = config.simulation
    seed = SeedSpec(master_seed=config.seed.master_seed)
    notice(f"master_seed={seed.master_seed}")

    snapshots = run_panel(
        config.model,
        sim.n_agents,
        sim.horizon,
        sim.burn_in,
        seed=seed,
        init=config.initial,
        workers=workers,
    )
    write_csv(snapshots_frame(snapshots), config.output.path, out)

    averages = time_average(snapshots)
    v_star = steady_state_variance(config.model)
    deviation = abs(averages.var_belief - v_star) / v_star if v_star > 0 else abs(averages.var_belief)
    notice(
        f"summary: mean var_belief={averages.var_belief:.6g} over {averages.periods} periods, "
        f"analytic v*={v_star:.6g}, deviation={deviation:.3%}"
    )


def cmd_welfare(
    config: RunConfig,
    v_min: float,
    v_max: float,
    points: int,
    out: Optional[TextIO] = None,
) -> None:
    if not 0 <= v_min < v_max:
        raise ConfigError(f"need 0 <= v_min < v_max, got [{v_min}, {v_max}]", key="--v-min")
    if points < 2:
        raise ConfigError(f"need at least 2 grid points, got {points}", key="--points")

    frame = welfare_curve(config.omega, config.model, np.linspace(v_min, v_max, points))
    footer = None
    try:
        opt = optimal_dispersion(config.omega, config.model.gamma)
        footer = f"# v_opt={format_float(opt.v_opt)},W_opt={format_float(opt.W_opt)}"
    except NoInteriorOptimum as e:
        logger.warning(f"No interior optimum: {e}")
        notice(f"warning: no interior optimum ({e})")
    except NonConcave as e:
        logger.warning(f"Welfare not single-peaked: {e}")
        notice(f"warning: welfare is not single-peaked, optimum not reported ({e})")
    write_csv(frame, config.output.path, out, footer=footer)


def cmd_optimize(config: RunConfig, out: Optional[TextIO] = None) -> None:
    opt = optimal_dispersion(config.omega, config.model.gamma)
    floor = equilibrium_variance(config.model)
    if opt.v_opt < floor:
        raise Infeasible(
            f"infeasible: optimal dispersion below signal-noise floor "
            f"(v_opt={opt.v_opt:.6g} < v_eq={floor:.6g})"
        )
    sigma_eta_star = implied_noise(opt.v_opt, config.model)
    frame = pd.DataFrame([{"v_opt": opt.v_opt, "W_opt": opt.W_opt, "sigma_eta_star": sigma_eta_star}])
    write_csv(frame, config.output.path, out)


def cmd_compare(config: RunConfig, sigma_eta_grid: Sequence[float], out: Optional[TextIO] = None) -> None:
    result = experiments.test_proposition2(config.omega, config.model, sigma_eta_grid)
    notice(f"dominating grid point present: {result.any_dominates}")
    write_csv(result.table, config.output.path, out)


def cmd_sweep(config: RunConfig, workers: int = 1, out: Optional[TextIO] = None) -> None:
    spec = config.sweep_spec()
    notice(f"master_seed={spec.master_seed}")

    def _progress(done: int, total: int) -> None:
        notice(f"sweep {done}/{total}")

    table = experiments.run_sweep(spec, workers=workers, progress=_progress)
    failed = int((table["error"] != "").sum())
    if failed:
        logger.warning(f"{failed} sweep row(s) carry an error")
    write_csv(table, config.output.path, out)


def cmd_transition(config: RunConfig, v0: float, periods: int, out: Optional[TextIO] = None) -> None:
    if v0 < 0:
        raise ConfigError(f"initial dispersion must be >= 0, got {v0}", key="--v0")
    if periods < 1:
        raise ConfigError(f"need at least one period, got {periods}", key="--periods")
    notice(f"dispersion half-life: {dispersion_half_life(config.model):.4g} periods")
    write_csv(welfare_path(config.omega, config.model, v0, periods), config.output.path, out)


def cmd_policy(
    config: RunConfig,
    sigma_nu_grid: Sequence[float],
    sigma_eta_grid: Sequence[float],
    out: Optional[TextIO] = None,
) -> None:
    write_csv(policy_surface(config.omega, config.model, sigma_nu_grid, sigma_eta_grid), config.output.path, out)


def cmd_tradeoff(
    spec: FigureTwoSpec,
    points: int,
    output_path: Optional[str] = None,
    out: Optional[TextIO] = None,
) -> None:
    if points < 2:
        raise ConfigError(f"need at least 2 grid points, got {points}", key="--points")
    curve = figure_two_curve(spec, np.linspace(0.0, 2.0, points))
    footer = f"# x_opt={format_float(curve.x_opt)},net_opt={format_float(curve.net_opt)}"
    write_csv(curve.table, output_path, out, footer=footer)
