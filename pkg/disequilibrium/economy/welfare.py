"""
Exploration benefit families, the output/welfare decomposition, the welfare
comparison against the equilibrium benchmark and the welfare-maximising
dispersion with the behavioral noise that implements it.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from disequilibrium.core.errors import DomainError, Infeasible, NoInteriorOptimum, NonConcave
from disequilibrium.core.models import ModelParams, validate_params
from disequilibrium.economy.moments import (
    SteadyState,
    equilibrium_variance,
    stationary_joint_moments,
    steady_state_variance,
    transition_path,
)

logger = logging.getLogger(__name__)

WELFARE_COLUMNS = ["v", "misallocation_gap", "dispersion_cost", "exploration_benefit", "W", "Y_expected"]
FIGURE_TWO_COLUMNS = ["x", "benefit", "cost", "net"]

# Optimiser constants
INTERIOR_PROBE = 1e-12
SEARCH_GRID = np.geomspace(1e-12, 1e6, 200)
BISECTION_TOL = 1e-10
CONFIRM_STEP = 1e-4


class OmegaSpec(BaseModel):
    """Exploration benefit Omega(v), normalised so that Omega(0) = 0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["linear", "sqrt", "log1p", "power"] = "sqrt"
    scale: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    exponent: float = Field(default=0.5, gt=0, le=1)  # power family only


class FigureTwoSpec(BaseModel):
    """Quadratic-cost trade-off: net(x) = benefit_slope*x - cost_coefficient*x**2."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    benefit_slope: float = Field(default=0.6, gt=0)
    cost_coefficient: float = Field(default=0.5, gt=0)


@dataclass(frozen=True)
class WelfareReport:
    v: float
    misallocation_gap: float
    dispersion_cost: float
    exploration_benefit: float
    W: float
    Y_expected: float

    def to_row(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class RegimeComparison:
    v_star: float
    v_eq: float
    W_diseq: float
    W_eq: float
    welfare_gain: float
    dominates: bool


@dataclass(frozen=True)
class OptimalDispersion:
    v_opt: float
    W_opt: float


@dataclass(frozen=True)
class FigureTwoCurve:
    table: pd.DataFrame
    x_opt: float
    net_opt: float


# ============================================================================
# EXPLORATION BENEFIT
# ============================================================================

def omega_value(spec: OmegaSpec, v: float) -> float:
    if v < 0:
        raise DomainError("v", f"dispersion must be >= 0, got {v}")
    if spec.family == "linear":
        return spec.scale * v
    if spec.family == "sqrt":
        return spec.scale * math.sqrt(v)
    if spec.family == "log1p":
        return spec.scale * math.log1p(v)
    return spec.scale * v ** spec.exponent


def omega_derivative(spec: OmegaSpec, v: float) -> float:
    """Analytic Omega'(v); +inf at the origin for the sqrt and sub-linear power families."""
    if v < 0:
        raise DomainError("v", f"dispersion must be >= 0, got {v}")
    if spec.family == "linear" or (spec.family == "power" and spec.exponent == 1):
        return spec.scale
    if spec.family == "log1p":
        return spec.scale / (1 + v)
    if v == 0:
        return math.inf
    if spec.family == "sqrt":
        return spec.scale / (2 * math.sqrt(v))
    return spec.scale * spec.exponent * v ** (spec.exponent - 1)


def welfare_value(spec: OmegaSpec, gamma: float, v: float) -> float:
    return -v + gamma * omega_value(spec, v)


def welfare_slope(spec: OmegaSpec, gamma: float, v: float) -> float:
    return -1 + gamma * omega_derivative(spec, v)


# ============================================================================
# WELFARE
# ============================================================================

def welfare(spec: OmegaSpec, p: ModelParams, v: float, steady: Optional[SteadyState] = None) -> WelfareReport:
    """Decompose expected output at dispersion `v`.

    The misallocation gap is the stationary variance of (m - theta); it does
    not depend on `v`, so W drops it while Y_expected keeps it.
    """
    if v < 0:
        raise DomainError("v", f"dispersion must be >= 0, got {v}")
    steady = steady or stationary_joint_moments(p)
    benefit = p.gamma * omega_value(spec, v)
    return WelfareReport(
        v=v,
        misallocation_gap=steady.var_gap,
        dispersion_cost=v,
        exploration_benefit=benefit,
        W=-v + benefit,
        Y_expected=-steady.var_gap - v + benefit,
    )


def welfare_curve(spec: OmegaSpec, p: ModelParams, v_grid: Sequence[float]) -> pd.DataFrame:
    steady = stationary_joint_moments(p)
    rows = [welfare(spec, p, float(v), steady).to_row() for v in v_grid]
    return pd.DataFrame(rows, columns=WELFARE_COLUMNS)


def welfare_path(spec: OmegaSpec, p: ModelParams, v0: float, periods: int) -> pd.DataFrame:
    """Welfare along the deterministic dispersion transition starting at v0."""
    path = transition_path(p, v0, periods)
    w_eq = welfare_value(spec, p.gamma, equilibrium_variance(p))
    return pd.DataFrame(
        {
            "t": np.arange(periods + 1),
            "v": path,
            "W": [welfare_value(spec, p.gamma, float(v)) for v in path],
            "W_eq": w_eq,
        }
    )


def compare_regimes(spec: OmegaSpec, p: ModelParams) -> RegimeComparison:
    v_star = steady_state_variance(p)
    v_eq = equilibrium_variance(p)
    w_diseq = welfare_value(spec, p.gamma, v_star)
    w_eq = welfare_value(spec, p.gamma, v_eq)
    return RegimeComparison(
        v_star=v_star,
        v_eq=v_eq,
        W_diseq=w_diseq,
        W_eq=w_eq,
        welfare_gain=w_diseq - w_eq,
        dominates=w_diseq > w_eq,
    )


def policy_surface(
    spec: OmegaSpec,
    p: ModelParams,
    sigma_nu_grid: Sequence[float],
    sigma_eta_grid: Sequence[float],
) -> pd.DataFrame:
    """Steady-state welfare across signal-noise and behavioral-noise levels."""
    rows = []
    for sigma_nu in sigma_nu_grid:
        for sigma_eta in sigma_eta_grid:
            q = validate_params(p.replace(sigma_nu=float(sigma_nu), sigma_eta=float(sigma_eta)))
            cmp = compare_regimes(spec, q)
            rows.append(
                {
                    "sigma_nu": q.sigma_nu,
                    "sigma_eta": q.sigma_eta,
                    "v_star": cmp.v_star,
                    "v_eq": cmp.v_eq,
                    "W_star": cmp.W_diseq,
                    "W_eq": cmp.W_eq,
                    "welfare_gain": cmp.welfare_gain,
                }
            )
    return pd.DataFrame(rows)


# ============================================================================
# OPTIMUM
# ============================================================================

def _bisect(f: Callable[[float], float], lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    """Root of f on [lo, hi] given f(lo) > 0 >= f(hi)."""
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_dispersion(spec: OmegaSpec, gamma: float) -> OptimalDispersion:
    """
    Interior maximiser of W(v) = -v + gamma*Omega(v).

    Raises:
        NoInteriorOptimum: if gamma*Omega'(0) <= 1, or W still rises at the end of the grid
        NonConcave: if the first-order condition changes sign more than once
    """
    if gamma <= 0:
        raise DomainError("gamma", f"exploration weight must be > 0, got {gamma}")

    def slope(v: float) -> float:
        return welfare_slope(spec, gamma, v)

    if slope(INTERIOR_PROBE) <= 0:
        raise NoInteriorOptimum(
            f"gamma * Omega'(0) <= 1 for {spec.family} benefit: welfare is maximised at v = 0"
        )

    rising = np.array([slope(float(v)) > 0 for v in SEARCH_GRID])
    crossings = np.nonzero(rising[:-1] != rising[1:])[0]
    if len(crossings) == 0:
        raise NoInteriorOptimum(
            f"welfare still increasing at v = {SEARCH_GRID[-1]:g}; no finite maximiser"
        )
    if len(crossings) > 1:
        raise NonConcave(f"first-order condition changes sign {len(crossings)} times on the search grid")

    k = int(crossings[0])
    v_opt = _bisect(slope, float(SEARCH_GRID[k]), float(SEARCH_GRID[k + 1]), BISECTION_TOL)
    w_opt = welfare_value(spec, gamma, v_opt)

    slack = 1e-12 * max(1.0, abs(w_opt))
    neighbours = (max(v_opt - CONFIRM_STEP, 0.0), v_opt + CONFIRM_STEP)
    if any(welfare_value(spec, gamma, v) > w_opt + slack for v in neighbours):
        raise NonConcave(f"stationary point v = {v_opt:.6g} is not a local maximum")

    return OptimalDispersion(v_opt=v_opt, W_opt=w_opt)


def implied_noise(v_target: float, p: ModelParams) -> float:
    """Behavioral noise sigma_eta whose steady-state dispersion equals v_target."""
    floor = equilibrium_variance(p)
    if v_target < floor:
        raise Infeasible(
            f"target dispersion {v_target:.6g} is below the signal-noise floor v_eq = {floor:.6g}"
        )
    # (v - v_eq)(2a - a^2) equals v(2a - a^2) - a^2 sigma_nu^2 but is exactly 0 at the floor
    a = p.alpha
    return math.sqrt(max((v_target - floor) * (2 * a - a ** 2), 0.0))


# ============================================================================
# QUADRATIC-COST TRADE-OFF
# ============================================================================

def figure_two_curve(spec: FigureTwoSpec, grid: Sequence[float]) -> FigureTwoCurve:
    x = np.asarray(grid, dtype=np.float64)
    if x.size and (x.min() < 0 or x.max() > 2):
        raise DomainError("grid", "trade-off grid must lie within [0, 2]")

    benefit = spec.benefit_slope * x
    cost = -spec.cost_coefficient * x ** 2
    x_opt = spec.benefit_slope / (2 * spec.cost_coefficient)
    net_opt = spec.benefit_slope * x_opt - spec.cost_coefficient * x_opt ** 2
    table = pd.DataFrame({"x": x, "benefit": benefit, "cost": cost, "net": benefit + cost}, columns=FIGURE_TWO_COLUMNS)
    return FigureTwoCurve(table=table, x_opt=x_opt, net_opt=net_opt)
