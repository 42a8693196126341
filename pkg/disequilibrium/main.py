"""
Command-line entry point.

    diseq steady-state --config run.toml
    diseq simulate --config run.toml --output traj.csv --workers 4
    diseq welfare --config run.toml --v-min 0 --v-max 4 --points 401
    diseq optimize --config run.toml
    diseq compare --config run.toml --sigma-eta-grid 0.1,0.3,0.5,1.0
    diseq sweep --config sweep.toml --workers 8
    diseq transition --config run.toml --v0 0 --periods 50
    diseq policy --config run.toml --sigma-nu-grid 0,0.5,1 --sigma-eta-grid 0,0.5,1
    diseq tradeoff --points 201

Exit codes: 0 success, 2 configuration/validation error, 3 mathematical infeasibility.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from disequilibrium import __version__
from disequilibrium.api import commands
from disequilibrium.api.schemas import RunConfig, load_run_config
from disequilibrium.core.config import settings
from disequilibrium.core.errors import ConfigError, DisequilibriumError
from disequilibrium.economy.welfare import FigureTwoSpec

logger = logging.getLogger(__name__)


def _load(args: argparse.Namespace) -> RunConfig:
    if not args.config:
        raise ConfigError("a TOML file is required", key="--config")
    config = load_run_config(args.config)
    return config.with_overrides(master_seed=args.seed, output_path=args.output)


def _workers(args: argparse.Namespace) -> int:
    workers = args.workers if args.workers is not None else settings.workers
    if workers < 1:
        raise ConfigError(f"need at least one worker, got {workers}", key="--workers")
    return workers


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--output", help="CSV output path (default: stdout)")
    common.add_argument("--workers", type=int, default=None, help="worker threads; never changes output")
    common.add_argument("--seed", type=int, default=None, help="override [seed].master_seed")

    parser = argparse.ArgumentParser(
        prog="diseq",
        description="Belief dispersion, misallocation and exploration: analytics and Monte Carlo",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("steady-state", parents=[common], help="stationary moments of the configured economy")
    sub.add_parser("simulate", parents=[common], help="post-burn-in panel trajectory")

    welfare = sub.add_parser("welfare", parents=[common], help="welfare curve on a uniform dispersion grid")
    welfare.add_argument("--v-min", type=float, default=0.0)
    welfare.add_argument("--v-max", type=float, default=4.0)
    welfare.add_argument("--points", type=int, default=401)

    sub.add_parser("optimize", parents=[common], help="welfare-maximising dispersion and behavioral noise")

    compare = sub.add_parser("compare", parents=[common], help="welfare against the equilibrium benchmark")
    compare.add_argument("--sigma-eta-grid", default="0,0.1,0.3,0.5,1.0")

    sub.add_parser("sweep", parents=[common], help="parameter sweep from the [sweep] table")

    transition = sub.add_parser("transition", parents=[common], help="welfare along the dispersion transition")
    transition.add_argument("--v0", type=float, default=0.0)
    transition.add_argument("--periods", type=int, default=50)

    policy = sub.add_parser("policy", parents=[common], help="welfare across signal and behavioral noise")
    policy.add_argument("--sigma-nu-grid", default="0,0.25,0.5,1.0")
    policy.add_argument("--sigma-eta-grid", default="0,0.25,0.5,1.0")

    tradeoff = sub.add_parser("tradeoff", parents=[common], help="quadratic-cost exploration trade-off on [0, 2]")
    tradeoff.add_argument("--points", type=int, default=201)

    return parser


def dispatch(args: argparse.Namespace) -> None:
    command = args.command
    if command == "tradeoff":
        if args.config:
            config = _load(args)
            commands.cmd_tradeoff(config.tradeoff, args.points, config.output.path)
        else:
            commands.cmd_tradeoff(FigureTwoSpec(), args.points, args.output)
        return

    config = _load(args)
    if command == "steady-state":
        commands.cmd_steady_state(config)
    elif command == "simulate":
        commands.cmd_simulate(config, workers=_workers(args))
    elif command == "welfare":
        commands.cmd_welfare(config, args.v_min, args.v_max, args.points)
    elif command == "optimize":
        commands.cmd_optimize(config)
    elif command == "compare":
        commands.cmd_compare(config, commands.parse_grid(args.sigma_eta_grid, "--sigma-eta-grid"))
    elif command == "sweep":
        commands.cmd_sweep(config, workers=_workers(args))
    elif command == "transition":
        commands.cmd_transition(config, args.v0, args.periods)
    elif command == "policy":
        commands.cmd_policy(
            config,
            commands.parse_grid(args.sigma_nu_grid, "--sigma-nu-grid"),
            commands.parse_grid(args.sigma_eta_grid, "--sigma-eta-grid"),
        )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    try:
        dispatch(args)
    except DisequilibriumError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command} rejected its input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return ConfigError.exit_code
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
