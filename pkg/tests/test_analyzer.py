import numpy as np
import pytest

from money_multiplier.src.analyzer import ScenarioAnalyzer
from money_multiplier.src.config import Config
from money_multiplier.src.errors import RowSolveError
from money_multiplier.src.models import ModelParameters, Regime, ScenarioRow


def row(period, i, i_r=0.0, chi=0.1, uc=0.0):
    return ScenarioRow(period=period, i=i, i_r=i_r, chi=chi, uc_over_y_obs=uc)


@pytest.fixture
def scenario():
    return [
        row("2004", 0.03, uc=0.01),
        row("2005", 0.05, uc=0.02),
        row("2006", 0.06, uc=0.015),
        row("2007", 0.045, uc=0.01),
    ]


def test_run_series_keeps_scenario_order(config, scenario):
    records = ScenarioAnalyzer(config).run_series(scenario)
    assert [r.period for r in records] == ["2004", "2005", "2006", "2007"]
    assert all(r.regime == Regime.SCARCE for r in records)
    for record, source in zip(records, scenario):
        assert record.uc_over_y == pytest.approx(source.uc_over_y_obs, abs=1e-9)
        assert record.delta_bar > 0.0


def test_run_series_is_a_pure_map(config, scenario):
    analyzer = ScenarioAnalyzer(config)
    forward = analyzer.run_series(scenario)
    backward = analyzer.run_series(list(reversed(scenario)))
    assert backward == list(reversed(forward))


def test_parallel_series_matches_sequential(scenario):
    sequential = ScenarioAnalyzer(Config()).run_series(scenario)
    parallel = ScenarioAnalyzer(Config(threads=2)).run_series(scenario)
    assert parallel == sequential


def test_zero_credit_override_equals_zero_observed_credit(config, scenario):
    analyzer = ScenarioAnalyzer(config)
    counterfactual = analyzer.run_series(scenario, {"delta_bar": 0.0})
    zeroed = analyzer.run_series([r.model_copy(update={"uc_over_y_obs": 0.0}) for r in scenario])
    assert counterfactual == zeroed


def test_series_override_applies_per_period(config, scenario):
    records = ScenarioAnalyzer(config).run_series(scenario, {"chi": [0.1, 0.15, 0.2, 0.25]})
    assert [r.chi for r in records] == [0.1, 0.15, 0.2, 0.25]


def test_rate_override_keeps_the_backed_out_credit_limit(config, scenario):
    analyzer = ScenarioAnalyzer(config)
    observed = analyzer.run_series(scenario)
    shifted = analyzer.run_series(scenario, {"i_r": 0.04})
    for before, after in zip(observed, shifted):
        assert after.i_r == 0.04
        assert after.delta_bar == before.delta_bar


def test_bad_overrides(config, scenario):
    analyzer = ScenarioAnalyzer(config)
    with pytest.raises(ValueError, match="cannot override"):
        analyzer.run_series(scenario, {"theta": 0.5})
    with pytest.raises(ValueError, match="3 values"):
        analyzer.run_series(scenario, {"chi": [0.1, 0.2, 0.3]})


def test_row_failure_names_the_period(config, scenario):
    bad = scenario + [row("2008", 0.05, uc=0.95)]
    with pytest.raises(RowSolveError, match="period 2008"):
        ScenarioAnalyzer(config).run_series(bad)


def test_switch_to_ample_reserves(config):
    records = ScenarioAnalyzer(config).run_series([
        row("2007", 0.05, 0.0, uc=0.15),
        row("2009", 0.039, 0.04, uc=0.01),
    ])
    before, after = records
    assert before.regime == Regime.SCARCE and after.regime == Regime.AMPLE
    assert after.zeta < before.zeta
    assert before.excess_ratio == 0.0
    assert after.excess_ratio > 0.0
    assert after.cd_ratio < before.cd_ratio


def test_sweep_policy_table(config):
    grid = list(np.linspace(0.01, 0.1, 10))
    table = ScenarioAnalyzer(config).sweep_policy(grid, [0.0], [0.0, 0.05], 0.1)
    assert list(table.columns) == [
        "i", "i_r", "chi", "delta_bar", "regime", "r", "l", "m", "m1", "zeta", "c_over_y", "cd_ratio",
    ]
    assert len(table) == 20
    for _, curve in table.groupby("delta_bar"):
        assert (curve["regime"] == Regime.SCARCE.value).all()
        assert np.all(np.diff(curve["r"].to_numpy()) < 0.0)
        assert np.all(np.diff(curve["m"].to_numpy()) < 0.0)
    low, high = (curve["r"].to_numpy() for _, curve in table.groupby("delta_bar"))
    assert np.all(high < low)


def test_sweep_rejects_empty_grids(config):
    with pytest.raises(ValueError, match="non-empty"):
        ScenarioAnalyzer(config).sweep_policy([], [0.0], [0.0], 0.1)


def test_welfare_surface_columns(config):
    table = ScenarioAnalyzer(config).welfare_surface([0.02, 0.04], [(0.1, 0.0)])
    assert list(table.columns) == [
        "chi", "i_r", "i", "regime", "total", "dispersion", "jb1", "js1", "jb2", "js2", "jb3", "js3",
    ]


def test_analyzer_uses_configured_parameters():
    config = Config(params=ModelParameters(sigma1=0.1))
    analyzer = ScenarioAnalyzer(config)
    assert analyzer.policy(0.05, 0.0, 0.1).sigma[0] == 0.1
