import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.optimize import minimize_scalar

from disequilibrium.core.errors import DomainError, Infeasible, NoInteriorOptimum, NonConcave
from disequilibrium.economy import welfare
from disequilibrium.economy.moments import equilibrium_variance, stationary_joint_moments, steady_state_variance
from disequilibrium.economy.welfare import (
    WELFARE_COLUMNS,
    FigureTwoSpec,
    OmegaSpec,
    compare_regimes,
    figure_two_curve,
    implied_noise,
    omega_derivative,
    omega_value,
    optimal_dispersion,
    policy_surface,
    welfare_curve,
    welfare_path,
    welfare_value,
)

from conftest import make_params

FAMILIES = [
    OmegaSpec(family="linear", scale=0.7),
    OmegaSpec(family="sqrt", scale=1.3),
    OmegaSpec(family="log1p", scale=2.0),
    OmegaSpec(family="power", scale=1.0, exponent=0.3),
]


# ============================================================================
# EXPLORATION BENEFIT
# ============================================================================

@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.family)
def test_benefit_vanishes_at_zero_and_increases(spec):
    assert omega_value(spec, 0.0) == 0.0
    rng = np.random.default_rng(5)
    for a, b in rng.uniform(0.0, 50.0, size=(1000, 2)):
        lo, hi = sorted((float(a), float(b)))
        if lo < hi:
            assert omega_value(spec, lo) < omega_value(spec, hi)


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.family)
def test_derivative_matches_finite_differences(spec):
    for v in np.logspace(-2, 2, 50):
        h = 1e-5 * v
        numeric = (omega_value(spec, v + h) - omega_value(spec, v - h)) / (2 * h)
        assert omega_derivative(spec, v) == pytest.approx(numeric, rel=1e-6)


def test_benefit_examples():
    assert omega_value(OmegaSpec(family="sqrt"), 4.0) == 2.0
    assert omega_value(OmegaSpec(family="log1p"), math.e - 1) == pytest.approx(1.0)
    power = OmegaSpec(family="power", exponent=0.5)
    assert omega_value(power, 9.0) == pytest.approx(omega_value(OmegaSpec(family="sqrt"), 9.0))
    assert omega_derivative(OmegaSpec(family="sqrt"), 0.0) == math.inf
    assert omega_derivative(OmegaSpec(family="log1p"), 0.0) == 1.0


def test_benefit_rejects_negative_dispersion(sqrt_omega):
    with pytest.raises(DomainError):
        omega_value(sqrt_omega, -0.1)
    with pytest.raises(DomainError):
        omega_derivative(sqrt_omega, -0.1)


def test_benefit_spec_validation():
    with pytest.raises(ValidationError):
        OmegaSpec(family="cubic")
    with pytest.raises(ValidationError):
        OmegaSpec(scale=0.0)
    with pytest.raises(ValidationError):
        OmegaSpec(family="power", exponent=1.5)


# ============================================================================
# WELFARE
# ============================================================================

def test_welfare_examples(sqrt_omega):
    p = make_params(gamma=2.0)
    assert welfare.welfare(sqrt_omega, p, 0.0).W == 0.0
    assert welfare.welfare(OmegaSpec(family="linear"), p, 0.5).W == pytest.approx(0.5)
    assert welfare.welfare(sqrt_omega, p, 1.0).W == pytest.approx(1.0)


def test_welfare_decomposition(sqrt_omega, base_params):
    steady = stationary_joint_moments(base_params)
    for v in [0.0, 0.3, 1.0, 7.5]:
        report = welfare.welfare(sqrt_omega, base_params, v)
        assert report.W == -report.dispersion_cost + report.exploration_benefit
        assert report.misallocation_gap == steady.var_gap
        assert report.Y_expected <= report.W
        assert report.Y_expected == pytest.approx(report.W - steady.var_gap)


def test_welfare_curve_layout(sqrt_omega, base_params):
    frame = welfare_curve(sqrt_omega, base_params, np.linspace(0.0, 4.0, 401))
    assert list(frame.columns) == WELFARE_COLUMNS
    assert len(frame) == 401
    assert frame["W"].idxmax() == 100


def test_welfare_path_approaches_steady_state(sqrt_omega, base_params):
    frame = welfare_path(sqrt_omega, base_params, 0.0, 40)
    assert list(frame.columns) == ["t", "v", "W", "W_eq"]
    assert frame["v"].iloc[-1] == pytest.approx(steady_state_variance(base_params))
    assert frame["W_eq"].nunique() == 1


# ============================================================================
# REGIME COMPARISON
# ============================================================================

def test_no_behavioral_noise_means_no_gain(sqrt_omega):
    cmp = compare_regimes(sqrt_omega, make_params(sigma_eta=0.0))
    assert cmp.v_star == cmp.v_eq
    assert cmp.welfare_gain == 0.0
    assert not cmp.dominates


def test_noise_dominates_under_sqrt_benefit(sqrt_omega):
    cmp = compare_regimes(sqrt_omega, make_params(alpha=0.5, sigma_nu=0.0, sigma_eta=math.sqrt(0.75), gamma=2.0))
    assert cmp.v_star == pytest.approx(1.0)
    assert cmp.W_diseq == pytest.approx(1.0)
    assert cmp.W_eq == 0.0
    assert cmp.dominates


def test_weak_linear_benefit_never_dominates():
    linear = OmegaSpec(family="linear")
    for sigma_eta in [0.1, 0.3, 0.5, 1.0, 3.0]:
        assert not compare_regimes(linear, make_params(gamma=0.5, sigma_eta=sigma_eta)).dominates


def test_gain_matches_closed_form(sqrt_omega):
    p = make_params(alpha=0.5, sigma_nu=0.1, gamma=2.0)
    for sigma_eta in [0.1, 0.3, 0.5, 1.0]:
        q = p.replace(sigma_eta=sigma_eta)
        v_star, v_eq = steady_state_variance(q), equilibrium_variance(q)
        expected = -(v_star - v_eq) + q.gamma * (math.sqrt(v_star) - math.sqrt(v_eq))
        assert compare_regimes(sqrt_omega, q).welfare_gain == pytest.approx(expected, abs=1e-12)


def test_comparison_ignores_fundamental_process(sqrt_omega, base_params):
    a = compare_regimes(sqrt_omega, base_params)
    b = compare_regimes(sqrt_omega, base_params.replace(rho=-0.3, sigma_eps=4.0))
    assert a == b


def test_policy_surface(sqrt_omega, base_params):
    frame = policy_surface(sqrt_omega, base_params, [0.0, 0.5, 1.0], [0.0, 0.5])
    assert len(frame) == 6
    assert frame["v_eq"].tolist() == pytest.approx([0.0, 0.0, 1 / 12, 1 / 12, 1 / 3, 1 / 3])
    quiet = frame[frame["sigma_eta"] == 0.0]
    assert (quiet["welfare_gain"] == 0.0).all()


def test_policy_surface_rejects_negative_noise(sqrt_omega, base_params):
    with pytest.raises(DomainError):
        policy_surface(sqrt_omega, base_params, [-1.0], [0.0])


# ============================================================================
# OPTIMUM
# ============================================================================

def test_sqrt_optimum(sqrt_omega):
    opt = optimal_dispersion(sqrt_omega, 2.0)
    assert opt.v_opt == pytest.approx(1.0, abs=1e-8)
    assert opt.W_opt == pytest.approx(1.0, abs=1e-8)

    golden = minimize_scalar(lambda v: -welfare_value(sqrt_omega, 2.0, v), bracket=(0.01, 0.5, 100.0), method="golden")
    assert opt.v_opt == pytest.approx(golden.x, abs=1e-6)


def test_log1p_optimum():
    spec = OmegaSpec(family="log1p")
    opt = optimal_dispersion(spec, 3.0)
    assert opt.v_opt == pytest.approx(2.0, abs=1e-8)
    golden = minimize_scalar(lambda v: -welfare_value(spec, 3.0, v), bracket=(0.01, 1.0, 50.0), method="golden")
    assert opt.v_opt == pytest.approx(golden.x, abs=1e-6)


def test_power_optimum():
    spec = OmegaSpec(family="power", exponent=0.3)
    opt = optimal_dispersion(spec, 2.0)
    assert opt.v_opt == pytest.approx(0.6 ** (1 / 0.7), rel=1e-8)


@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_linear_benefit_has_no_interior_optimum(gamma):
    with pytest.raises(NoInteriorOptimum):
        optimal_dispersion(OmegaSpec(family="linear"), gamma)


def test_weak_log1p_benefit_has_no_interior_optimum():
    with pytest.raises(NoInteriorOptimum):
        optimal_dispersion(OmegaSpec(family="log1p"), 0.9)


def test_several_stationary_points_are_reported(monkeypatch, sqrt_omega):
    def wavy(spec, gamma, v):
        return 1.0 if v < 1.0 or 10.0 < v < 100.0 else -1.0

    monkeypatch.setattr(welfare, "welfare_slope", wavy)
    with pytest.raises(NonConcave):
        optimal_dispersion(sqrt_omega, 2.0)


@pytest.mark.parametrize(
    "spec, gamma",
    [
        (OmegaSpec(family="sqrt"), 2.0),
        (OmegaSpec(family="log1p"), 3.0),
        (OmegaSpec(family="power", exponent=0.3), 2.0),
    ],
)
def test_welfare_is_single_peaked_around_the_optimum(spec, gamma):
    v_opt = optimal_dispersion(spec, gamma).v_opt
    grid = np.linspace(0.0, 4.0, 1000)
    values = np.array([welfare_value(spec, gamma, v) for v in grid])
    for k in range(len(grid) - 1):
        if grid[k + 1] <= v_opt:
            assert values[k + 1] > values[k]
        elif grid[k] >= v_opt:
            assert values[k + 1] < values[k]


# ============================================================================
# IMPLIED NOISE
# ============================================================================

def test_implied_noise_examples():
    p = make_params(alpha=0.5, sigma_nu=1.0)
    assert implied_noise(equilibrium_variance(p), p) == 0.0
    assert implied_noise(2 / 3, p) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(Infeasible):
        implied_noise(0.1, p)


def test_implied_noise_inverts_steady_state():
    p = make_params(alpha=0.4, sigma_nu=0.7)
    for sigma_eta in [0.0, 1e-3, 0.2, 0.9, 2.5]:
        q = p.replace(sigma_eta=sigma_eta)
        assert implied_noise(steady_state_variance(q), q) == pytest.approx(sigma_eta, abs=1e-10)
    for v in [0.5, 1.0, 4.0]:
        recovered = p.replace(sigma_eta=implied_noise(v, p))
        assert steady_state_variance(recovered) == pytest.approx(v, abs=1e-10)


# ============================================================================
# QUADRATIC-COST TRADE-OFF
# ============================================================================

def test_tradeoff_curve():
    curve = figure_two_curve(FigureTwoSpec(), np.linspace(0.0, 2.0, 201))
    table = curve.table
    assert curve.x_opt == pytest.approx(0.6, abs=1e-10)
    assert curve.net_opt == pytest.approx(0.18, abs=1e-10)
    assert table["x"].iloc[table["net"].idxmax()] == pytest.approx(0.6, abs=1e-10)
    assert table.iloc[0][["benefit", "cost", "net"]].tolist() == [0.0, 0.0, 0.0]
    at_break_even = table.iloc[120]
    assert at_break_even["x"] == pytest.approx(1.2)
    assert at_break_even["net"] == pytest.approx(0.0, abs=1e-12)


def test_tradeoff_grid_must_stay_in_range():
    with pytest.raises(DomainError):
        figure_two_curve(FigureTwoSpec(), [0.0, 2.5])


@pytest.mark.parametrize("value", [float("nan"), float("inf")])
def test_policy_surface_rejects_non_finite_noise(sqrt_omega, base_params, value):
    with pytest.raises(DomainError):
        policy_surface(sqrt_omega, base_params, [value], [0.5])
    with pytest.raises(DomainError):
        policy_surface(sqrt_omega, base_params, [1.0], [value])
