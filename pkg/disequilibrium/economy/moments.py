"""
Analytical layer: cross-sectional moment recursions, steady-state dispersion,
the equilibrium benchmark and stationary second moments of the joint
(fundamental, mean belief) system.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from disequilibrium.core.config import settings
from disequilibrium.core.errors import DomainError, NotConverged
from disequilibrium.core.models import ModelParams, MomentState
from disequilibrium.core.rng import SeedSpec, Shock, block_generator

logger = logging.getLogger(__name__)

STEADY_STATE_COLUMNS = ["v_star", "v_eq", "var_theta", "var_gap", "cov_m_theta"]


@dataclass(frozen=True)
class SteadyState:
    v_star: float
    v_eq: float
    var_theta: float
    var_gap: float
    cov_m_theta: float
    var_m: float

    def to_row(self) -> Dict[str, float]:
        row = asdict(self)
        return {key: row[key] for key in STEADY_STATE_COLUMNS}


# ============================================================================
# RECURSIONS
# ============================================================================

def recurse_mean(m: float, theta: float, p: ModelParams) -> float:
    return (1 - p.alpha) * m + p.alpha * theta


def recurse_variance(v: float, p: ModelParams) -> float:
    if v < 0:
        raise DomainError("v", f"dispersion must be >= 0, got {v}")
    return (1 - p.alpha) ** 2 * v + p.alpha ** 2 * p.sigma_nu ** 2 + p.sigma_eta ** 2


def moment_path(p: ModelParams, thetas: Sequence[float], m0: float, v0: float) -> List[MomentState]:
    """Drive the mean and variance recursions with a given fundamental history."""
    thetas = np.asarray(thetas, dtype=np.float64)
    states = [MomentState(theta=float(thetas[0]), m=m0, v=v0)]
    for theta_next in thetas[1:]:
        prev = states[-1]
        states.append(
            MomentState(
                theta=float(theta_next),
                m=recurse_mean(prev.m, prev.theta, p),
                v=recurse_variance(prev.v, p),
            )
        )
    return states


def transition_path(p: ModelParams, v0: float, periods: int) -> np.ndarray:
    """Deterministic dispersion path v_0..v_periods."""
    path = np.empty(periods + 1)
    path[0] = v0
    for t in range(periods):
        path[t + 1] = recurse_variance(path[t], p)
    return path


# ============================================================================
# STEADY STATES
# ============================================================================

def steady_state_variance(p: ModelParams) -> float:
    a = p.alpha
    return (a ** 2 * p.sigma_nu ** 2 + p.sigma_eta ** 2) / (2 * a - a ** 2)


def equilibrium_variance(p: ModelParams) -> float:
    """Stationary dispersion with behavioral noise shut off."""
    return steady_state_variance(p.replace(sigma_eta=0.0))


def iterate_variance(
    p: ModelParams,
    v0: float = 0.0,
    tol: float = settings.fixed_point_tol,
    max_iter: int = settings.fixed_point_max_iter,
) -> Tuple[float, int]:
    """
    Fixed-point iteration of the variance recursion.

    Returns:
        (limit, iterations) once successive iterates differ by less than `tol`.
    """
    v = v0
    for i in range(1, max_iter + 1):
        v_next = recurse_variance(v, p)
        if abs(v_next - v) < tol:
            return v_next, i
        v = v_next
    raise NotConverged(f"variance recursion did not settle within {max_iter} iterations")


def convergence_steps_bound(p: ModelParams, v0: float, tol: float) -> int:
    gap = abs(v0 - steady_state_variance(p))
    if gap <= tol:
        return 0
    rate = (1 - p.alpha) ** 2
    if rate == 0:
        return 1
    return math.ceil(math.log(tol / gap) / math.log(rate))


def dispersion_half_life(p: ModelParams) -> float:
    """Periods needed for the distance to v* to halve."""
    rate = (1 - p.alpha) ** 2
    if rate == 0:
        return 0.0
    return math.log(0.5) / math.log(rate)


# ============================================================================
# JOINT (THETA, M) SYSTEM
# ============================================================================

def transition_matrix(p: ModelParams) -> np.ndarray:
    return np.array([[p.rho, 0.0], [p.alpha, 1 - p.alpha]])


def shock_covariance(p: ModelParams) -> np.ndarray:
    return np.array([[p.sigma_eps ** 2, 0.0], [0.0, 0.0]])


def stationary_theta_variance(p: ModelParams) -> float:
    return p.sigma_eps ** 2 / (1 - p.rho ** 2)


def stationary_joint_moments(p: ModelParams) -> SteadyState:
    """
    Solve Sigma = A Sigma A' + Q for the 2x2 system in closed form.

    With A = [[rho, 0], [alpha, 1 - alpha]] the three distinct entries
    decouple: var_theta first, then the covariance, then var_m.
    """
    a, rho = p.alpha, p.rho
    var_theta = stationary_theta_variance(p)
    cov = rho * a * var_theta / (1 - rho * (1 - a))
    var_m = (a ** 2 * var_theta + 2 * a * (1 - a) * cov) / (2 * a - a ** 2)
    var_gap = max(var_m + var_theta - 2 * cov, 0.0)
    return SteadyState(
        v_star=steady_state_variance(p),
        v_eq=equilibrium_variance(p),
        var_theta=var_theta,
        var_gap=var_gap,
        cov_m_theta=cov,
        var_m=var_m,
    )


def lyapunov_residual(p: ModelParams, ss: SteadyState) -> float:
    sigma = np.array([[ss.var_theta, ss.cov_m_theta], [ss.cov_m_theta, ss.var_m]])
    a = transition_matrix(p)
    return float(np.max(np.abs(sigma - a @ sigma @ a.T - shock_covariance(p))))


def simulate_continuum(p: ModelParams, periods: int, seed: SeedSpec, burn_in: int = 1000) -> pd.DataFrame:
    """
    Simulate the continuum-limit aggregate system: the AR(1) fundamental and
    the mean-belief recursion, with idiosyncratic noise averaged out.
    """
    total = periods + burn_in
    eps = block_generator(seed, Shock.FUNDAMENTAL, 0, 0).normal(0.0, p.sigma_eps, total)
    theta = lfilter([1.0], [1.0, -p.rho], eps)
    m = lfilter([0.0, p.alpha], [1.0, -(1 - p.alpha)], theta)
    logger.debug(f"Simulated continuum path of {total} periods ({burn_in} burn-in)")
    return pd.DataFrame({"theta": theta[burn_in:], "m": m[burn_in:], "gap": (m - theta)[burn_in:]})
