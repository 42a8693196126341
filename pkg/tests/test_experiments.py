import math

import pandas as pd
import pytest
from pydantic import ValidationError

from disequilibrium.core.errors import ConfigError, DomainError, NotConverged
from disequilibrium.economy import experiments
from disequilibrium.economy.dynamics import InitialCondition, run_panel, time_average
from disequilibrium.economy.experiments import SWEEP_COLUMNS, SweepSpec, mc_error_budget, run_sweep, variance_decay_rate
from disequilibrium.economy.moments import equilibrium_variance, steady_state_variance
from disequilibrium.economy.welfare import OmegaSpec

from conftest import make_params


def small_sweep(**changes) -> SweepSpec:
    fields = dict(
        rho=[0.9],
        sigma_eps=[1.0],
        alpha=[0.5],
        sigma_nu=[1.0],
        sigma_eta=[0.5],
        gamma=[2.0],
        n_agents=200,
        horizon=150,
        burn_in=50,
        replications=2,
        master_seed=123,
    )
    fields.update(changes)
    return SweepSpec(**fields)


# ============================================================================
# ERGODICITY
# ============================================================================

def test_panels_from_opposite_extremes_agree(base_params, seed):
    report = experiments.test_ergodicity(base_params, 20_000, 400, 1e-2, seed=seed)
    assert report.converged
    assert report.window <= report.periods_to_tolerance <= 400
    assert report.distance < 1e-2
    assert report.init_a != report.init_b


def test_agreement_is_exact_without_idiosyncratic_noise(seed):
    p = make_params(sigma_nu=0.0, sigma_eta=0.0)
    report = experiments.test_ergodicity(p, 500, 200, 1e-12, seed=seed)
    assert report.periods_to_tolerance == report.window
    assert report.distance == 0.0


def test_exhausted_horizon_attaches_report(base_params, seed):
    with pytest.raises(NotConverged) as exc:
        experiments.test_ergodicity(base_params, 2_000, 50, 1e-2, seed=seed)
    report = exc.value.report
    assert report is not None
    assert not report.converged
    assert report.periods_to_tolerance is None
    assert report.distance > 1e-2


def test_horizon_shorter_than_window(base_params):
    with pytest.raises(ConfigError):
        experiments.test_ergodicity(base_params, 100, 10, 1e-2)


@pytest.mark.slow
def test_ergodicity_at_full_scale(base_params, seed):
    report = experiments.test_ergodicity(base_params, 100_000, 5_000, 1e-2, seed=seed, workers=4)
    assert report.converged
    assert report.periods_to_tolerance <= 5_000

    offset = 10 * math.sqrt(steady_state_variance(base_params))
    for stream, mean in [(1, offset), (2, -offset)]:
        snaps = run_panel(
            base_params,
            100_000,
            1_100,
            100,
            seed=seed.stream(stream),
            init=InitialCondition(belief_mean=mean),
            fundamental_seed=seed,
            workers=4,
        )
        assert time_average(snaps).var_belief == pytest.approx(2 / 3, rel=0.02)


# ============================================================================
# DISPERSION DECAY
# ============================================================================

@pytest.mark.parametrize("alpha, expected", [(0.5, 0.25), (0.3, 0.49), (1.5, 0.25)])
def test_decay_rate_matches_adjustment_speed(alpha, expected, seed):
    fit = variance_decay_rate(make_params(alpha=alpha), seed=seed)
    assert fit.expected == pytest.approx(expected)
    assert fit.rel_err < 1e-6


def test_decay_rate_needs_partial_adjustment():
    with pytest.raises(ConfigError):
        variance_decay_rate(make_params(alpha=1.0))


def test_error_budget():
    assert mc_error_budget(1.0, 200, 100) == pytest.approx(5 * math.sqrt(2 / (200 * 100)))
    assert mc_error_budget(0.5, 1000, 1000) > mc_error_budget(1.0, 1000, 1000)


# ============================================================================
# PRODUCTIVE DISEQUILIBRIUM
# ============================================================================

def test_some_noise_level_dominates_under_sqrt_benefit(sqrt_omega):
    p = make_params(alpha=0.5, sigma_nu=0.1, gamma=2.0)
    result = experiments.test_proposition2(sqrt_omega, p, [0.1, 0.3, 0.5, 1.0])
    assert result.any_dominates
    assert list(result.table.columns) == experiments.PROPOSITION2_COLUMNS
    for row in result.table.itertuples():
        q = p.replace(sigma_eta=row.sigma_eta)
        v_star, v_eq = steady_state_variance(q), equilibrium_variance(q)
        expected = -(v_star - v_eq) + 2.0 * (math.sqrt(v_star) - math.sqrt(v_eq))
        assert row.welfare_gain == pytest.approx(expected, abs=1e-12)


def test_weak_linear_benefit_never_dominates():
    result = experiments.test_proposition2(
        OmegaSpec(family="linear"), make_params(gamma=0.5), [0.1, 0.3, 0.5, 1.0]
    )
    assert not result.any_dominates


def test_zero_noise_grid_cannot_dominate(sqrt_omega, base_params):
    result = experiments.test_proposition2(sqrt_omega, base_params, [0.0])
    assert len(result.table) == 1
    assert not result.any_dominates


# ============================================================================
# SWEEPS
# ============================================================================

def test_sweep_spec_requires_horizon_beyond_burn_in():
    with pytest.raises(ValidationError):
        small_sweep(horizon=50, burn_in=50)
    with pytest.raises(ValidationError):
        small_sweep(alpha=[])


def test_sweep_is_reproducible():
    spec = small_sweep()
    a, b = run_sweep(spec), run_sweep(spec)
    assert list(a.columns) == SWEEP_COLUMNS
    assert len(a) == 2
    pd.testing.assert_frame_equal(a, b)
    assert a["mc_var_belief"].iloc[0] != a["mc_var_belief"].iloc[1]


def test_sweep_does_not_depend_on_worker_count():
    spec = small_sweep(alpha=[0.3, 0.5, 1.5], sigma_eta=[0.0, 0.5])
    serial = run_sweep(spec, workers=1)
    threaded = run_sweep(spec, workers=4)
    pd.testing.assert_frame_equal(serial, threaded)


def test_inadmissible_cell_is_isolated():
    seen = []
    table = run_sweep(small_sweep(alpha=[0.5, 2.0], replications=1), progress=lambda done, total: seen.append(total))
    assert len(table) == 2
    good, bad = table.iloc[0], table.iloc[1]
    assert good["error"] == ""
    assert good["v_star_analytic"] == pytest.approx(2 / 3)
    assert "alpha" in bad["error"]
    assert math.isnan(bad["mc_var_belief"])
    assert seen == [2, 2]


def test_sweep_agrees_with_analytic_dispersion():
    spec = small_sweep(
        alpha=[0.2, 0.5, 0.8, 1.0, 1.5],
        sigma_eta=[0.0, 0.5, 1.0],
        n_agents=2000,
        horizon=300,
        burn_in=100,
    )
    table = run_sweep(spec)
    assert len(table) == 30
    assert (table["error"] == "").all()
    for row in table.itertuples():
        budget = mc_error_budget(row.alpha, spec.n_agents, spec.horizon - spec.burn_in)
        assert row.mc_rel_err <= budget + 1 / spec.n_agents


def test_sweep_streams_follow_cell_and_replication():
    spec = small_sweep(replications=3)
    table = run_sweep(spec)
    assert table["replication"].tolist() == [0, 1, 2]
    single = run_sweep(small_sweep(replications=1))
    assert single["mc_var_belief"].iloc[0] == table["mc_var_belief"].iloc[0]


@pytest.mark.parametrize("value", [float("nan"), float("inf")])
def test_non_finite_noise_grid_is_rejected(sqrt_omega, base_params, value):
    with pytest.raises(DomainError) as exc:
        experiments.test_proposition2(sqrt_omega, base_params, [0.1, value])
    assert exc.value.field == "sigma_eta"
