import math

import numpy as np
import pytest

from money_multiplier.pipeline.pipeline_runner import DEFAULT_BOUNDS
from money_multiplier.src.aggregates import aggregates
from money_multiplier.src.calibration import (
    AVERAGED_MOMENTS,
    PENALTY,
    MomentCalibrator,
    backout_delta,
    calibrate,
    model_moments,
    objective,
    semi_elasticity,
    solve_with_backout,
    target_residuals,
)
from money_multiplier.src.errors import InfeasibleTargetError, RowSolveError
from money_multiplier.src.models import (
    CALIBRATED_PARAMETERS,
    TARGET_NAMES,
    CalibrationSpec,
    CalibrationTarget,
    ModelParameters,
    ParameterBound,
    Regime,
    ScenarioRow,
)


def scenario_rows(rates, uc=0.0):
    return tuple(
        ScenarioRow(period=str(1990 + k), i=i, i_r=0.0, chi=0.1, uc_over_y_obs=uc)
        for k, i in enumerate(rates)
    )


@pytest.mark.parametrize("i, uc", [(0.05, 0.01), (0.05, 0.2), (0.1, 0.05), (0.001, 0.02)])
def test_backout_reproduces_the_observed_ratio(prefs, costs, params, i, uc):
    policy = params.policy(i, 0.0, 0.1)
    delta_bar, eq = solve_with_backout(prefs, costs, policy, uc)
    assert eq.policy.delta_bar == delta_bar
    assert aggregates(eq, prefs, costs).uc_over_y == pytest.approx(uc, abs=1e-9)


def test_backout_of_zero_ratio(prefs, costs, scarce_policy):
    assert backout_delta(prefs, costs, scarce_policy, 0.0) == 0.0


def test_backout_rejects_unattainable_ratio(prefs, costs, scarce_policy):
    with pytest.raises(InfeasibleTargetError) as info:
        backout_delta(prefs, costs, scarce_policy, 0.9)
    assert 0.0 < info.value.supremum < 0.9


def test_backout_rejects_negative_ratio(prefs, costs, scarce_policy):
    with pytest.raises(ValueError, match="negative"):
        backout_delta(prefs, costs, scarce_policy, -0.01)


def test_semi_elasticity_recovers_log_linear_slope():
    rates = [0.01, 0.03, 0.02, 0.06, 0.05]
    c_over_y = [0.05 * math.exp(-3.7 * i) for i in rates]
    assert semi_elasticity(rates, c_over_y) == pytest.approx(-3.7, rel=1e-9)


def test_semi_elasticity_needs_rate_variation():
    assert semi_elasticity([0.05, 0.05, 0.05], [0.04, 0.04, 0.04]) is None
    assert semi_elasticity([0.05], [0.04]) is None
    assert semi_elasticity([0.02, 0.02], [0.04, 0.03]) is None


def test_semi_elasticity_from_two_rows():
    rates = [0.01, 0.03]
    c_over_y = [0.05 * math.exp(-3.7 * i) for i in rates]
    assert semi_elasticity(rates, c_over_y) == pytest.approx(-3.7, rel=1e-9)


def test_objective_and_residuals():
    targets = [
        CalibrationTarget(name="markup", value=1.4),
        CalibrationTarget(name="c_over_y", value=0.05, weight=2.0),
        CalibrationTarget(name="pi_over_d", value=0.01, weight=0.0),
    ]
    moments = {"markup": 1.4 * 1.1, "c_over_y": 0.05 * 0.9, "pi_over_d": 0.5}
    residuals = target_residuals(moments, targets)
    assert residuals["markup"] == pytest.approx(0.1)
    assert residuals["c_over_y"] == pytest.approx(-0.1)
    assert objective(moments, targets) == pytest.approx(0.01 + 2.0 * 0.01)
    assert objective({"markup": None, "c_over_y": 0.05, "pi_over_d": 0.5}, targets) == 0.0


def test_zero_target_with_weight_is_rejected():
    with pytest.raises(ValueError, match="relative residuals"):
        CalibrationTarget(name="markup", value=0.0)


def test_model_moments_average_over_the_scenario(params):
    scenario = scenario_rows([0.03, 0.05, 0.07], uc=0.01)
    moments = model_moments(params, scenario)
    assert set(moments) >= {"markup", "c_over_y", "cd_ratio", "r_over_y", "semi_elasticity"}
    assert moments["semi_elasticity"] < 0.0
    assert 0.0 < moments["c_over_y"] < 1.0


def test_model_moments_name_the_failing_period(params):
    scenario = scenario_rows([0.03, 0.05]) + (
        ScenarioRow(period="1999", i=0.05, i_r=0.0, chi=0.1, uc_over_y_obs=0.9),
    )
    with pytest.raises(RowSolveError, match="1999"):
        model_moments(params, scenario)


def test_unsolvable_trial_gets_the_penalty(params):
    spec = CalibrationSpec(
        free=(ParameterBound(name="B", lower=0.5, upper=1.5),),
        targets=(CalibrationTarget(name="c_over_y", value=0.05),),
        scenario=(ScenarioRow(period="2000", i=0.05, i_r=0.0, chi=0.1, uc_over_y_obs=0.9),),
    )
    assert MomentCalibrator(spec).evaluate(np.array([0.825])) == PENALTY


def test_starting_points_are_deterministic(params):
    spec = CalibrationSpec(
        free=(
            ParameterBound(name="B", lower=0.5, upper=1.5),
            ParameterBound(name="sigma1", lower=0.05, upper=0.3),
        ),
        targets=(CalibrationTarget(name="c_over_y", value=0.05),),
        scenario=scenario_rows([0.05]),
        starts=4,
        seed=7,
    )
    first = MomentCalibrator(spec).starting_points()
    second = MomentCalibrator(spec).starting_points()
    assert len(first) == 4
    np.testing.assert_array_equal(first[0], [0.825, 0.187])
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a, b)
    for x in first[1:]:
        assert 0.5 <= x[0] <= 1.5 and 0.05 <= x[1] <= 0.3


def test_calibration_recovers_known_parameters():
    truth = ModelParameters()
    scenario = scenario_rows([0.03, 0.04, 0.05, 0.06, 0.07])
    moments = model_moments(truth, scenario)
    targets = tuple(
        CalibrationTarget(name=name, value=moments[name]) for name in ("c_over_y", "cd_ratio", "markup")
    )
    spec = CalibrationSpec(
        free=(
            ParameterBound(name="B", lower=0.5, upper=1.5),
            ParameterBound(name="sigma1", lower=0.05, upper=0.3),
        ),
        initial=truth.with_changes(B=truth.B * 1.2, sigma1=truth.sigma1 * 0.8),
        targets=targets,
        scenario=scenario,
        starts=2,
        seed=1,
        max_iter=2000,
    )
    result = MomentCalibrator(spec).run()
    assert result.objective <= 1e-10
    assert result.parameters.B == pytest.approx(truth.B, rel=1e-3)
    assert result.parameters.sigma1 == pytest.approx(truth.sigma1, rel=1e-3)
    assert len(result.starts) == 2
    assert calibrate(spec) == result


def test_scenario_rows_are_scarce(params):
    # The recovery scenario above never leaves the scarce regime
    prefs, costs = params.preferences, params.bank_costs
    for row in scenario_rows([0.03, 0.07]):
        _, eq = solve_with_backout(prefs, costs, params.policy(row.i, row.i_r, row.chi), row.uc_over_y_obs)
        assert eq.regime == Regime.SCARCE


def test_one_row_scenario_moments_are_that_rows_statistics(params):
    prefs, costs = params.preferences, params.bank_costs
    row = ScenarioRow(period="2000", i=0.05, i_r=0.0, chi=0.1, uc_over_y_obs=0.01)
    _, eq = solve_with_backout(prefs, costs, params.policy(row.i, row.i_r, row.chi), row.uc_over_y_obs)
    stats = aggregates(eq, prefs, costs)
    moments = model_moments(params, (row,))
    for name in AVERAGED_MOMENTS:
        assert moments[name] == pytest.approx(getattr(stats, name), rel=1e-12)
    assert moments["semi_elasticity"] is None


def test_default_parameters_reach_the_markup_and_semi_elasticity_targets(params):
    # Only these two targets are within reach of the default parameters
    rates = np.linspace(0.04, 0.12, 10)
    ratios = np.linspace(0.0, 0.15, 10)
    scenario = tuple(
        ScenarioRow(period=str(1968 + k), i=float(i), i_r=0.0, chi=0.1, uc_over_y_obs=float(uc))
        for k, (i, uc) in enumerate(zip(rates, ratios))
    )
    moments = model_moments(params, scenario)
    assert moments["markup"] == pytest.approx(1.384, rel=0.15)
    assert moments["semi_elasticity"] == pytest.approx(-3.712, rel=0.15)


def full_spec(truth, scenario, **changes):
    moments = model_moments(truth, scenario)
    targets = tuple(CalibrationTarget(name=name, value=moments[name]) for name in TARGET_NAMES)
    free = tuple(
        ParameterBound(name=name, lower=0.5 * getattr(truth, name), upper=1.5 * getattr(truth, name))
        for name in CALIBRATED_PARAMETERS
    )
    settings = dict(free=free, initial=truth, targets=targets, scenario=scenario, starts=1)
    settings.update(changes)
    return CalibrationSpec(**settings)


def test_calibration_recovers_the_full_free_set():
    truth = ModelParameters()
    scenario = scenario_rows([0.03, 0.05, 0.07], uc=0.01)
    start = truth.with_changes(**{
        name: getattr(truth, name) * (1.2 if k % 2 == 0 else 0.8)
        for k, name in enumerate(CALIBRATED_PARAMETERS)
    })
    spec = full_spec(truth, scenario, initial=start, max_iter=6000)
    result = calibrate(spec)
    assert result.objective <= 1e-10
    for name in CALIBRATED_PARAMETERS:
        assert getattr(result.parameters, name) == pytest.approx(getattr(truth, name), rel=1e-3)


def test_true_parameters_beat_random_draws():
    truth = ModelParameters()
    spec = full_spec(truth, scenario_rows([0.03, 0.05, 0.07], uc=0.01), free=DEFAULT_BOUNDS)
    calibrator = MomentCalibrator(spec)
    at_truth = calibrator.evaluate(np.array([getattr(truth, n) for n in calibrator.names]))
    assert at_truth == 0.0
    rng = np.random.default_rng(3)
    draws = [calibrator.evaluate(rng.uniform(calibrator.lower, calibrator.upper)) for _ in range(100)]
    assert all(value > at_truth for value in draws)


def two_parameter_spec(targets=None):
    truth = ModelParameters()
    scenario = scenario_rows([0.03, 0.05, 0.07])
    moments = model_moments(truth, scenario)
    if targets is None:
        targets = tuple(
            CalibrationTarget(name=name, value=moments[name]) for name in ("c_over_y", "cd_ratio", "markup")
        )
    return CalibrationSpec(
        free=(
            ParameterBound(name="B", lower=0.5, upper=1.5),
            ParameterBound(name="sigma1", lower=0.05, upper=0.3),
        ),
        initial=truth.with_changes(B=truth.B * 1.2, sigma1=truth.sigma1 * 0.8),
        targets=targets,
        scenario=scenario,
        starts=1,
        max_iter=2000,
    )


def test_fit_ignores_target_order_and_weight_scale():
    base = two_parameter_spec()
    reordered = two_parameter_spec(tuple(reversed(base.targets)))
    rescaled = two_parameter_spec(
        tuple(CalibrationTarget(name=t.name, value=t.value, weight=4.0 * t.weight) for t in base.targets)
    )
    moments = {t.name: t.value * 1.1 for t in base.targets}
    assert objective(moments, reordered.targets) == pytest.approx(objective(moments, base.targets), rel=1e-14)
    assert objective(moments, rescaled.targets) == pytest.approx(4.0 * objective(moments, base.targets), rel=1e-14)

    fitted = calibrate(base).parameters
    for spec in (reordered, rescaled):
        other = calibrate(spec).parameters
        assert other.B == pytest.approx(fitted.B, rel=1e-4)
        assert other.sigma1 == pytest.approx(fitted.sigma1, rel=1e-4)
