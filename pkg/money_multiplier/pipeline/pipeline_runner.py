import logging
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from money_multiplier.src.analyzer import Override, ScenarioAnalyzer
from money_multiplier.src.calibration import calibrate
from money_multiplier.src.config import Config
from money_multiplier.src.econometrics import model_implied_regressions, multiplier_break_test
from money_multiplier.src.equilibrium import thresholds
from money_multiplier.src.loader import load_scenario
from money_multiplier.src.models import (
    AggregateStats,
    CalibrationResult,
    CalibrationSpec,
    CalibrationTarget,
    ChowTestResult,
    Equilibrium,
    ParameterBound,
    RegressionResult,
    SeriesRecord,
    WelfareReport,
)
from money_multiplier.src.utils import format_float

logger = logging.getLogger(__name__)

# Moments the default parameters were fitted to
DEFAULT_TARGETS = (
    CalibrationTarget(name="c_over_y", value=0.044),
    CalibrationTarget(name="cd_ratio", value=0.523),
    CalibrationTarget(name="uc_over_dm", value=0.370),
    CalibrationTarget(name="r_over_y", value=0.017),
    CalibrationTarget(name="pi_over_y", value=0.0011),
    CalibrationTarget(name="markup", value=1.384),
    CalibrationTarget(name="semi_elasticity", value=-3.712),
)

DEFAULT_BOUNDS = (
    ParameterBound(name="theta", lower=0.05, upper=0.95),
    ParameterBound(name="A", lower=1e-4, upper=0.05),
    ParameterBound(name="B", lower=0.3, upper=3.0),
    ParameterBound(name="b", lower=0.05, upper=0.9),
    ParameterBound(name="k", lower=1e-4, upper=0.02),
    ParameterBound(name="E", lower=1e-4, upper=0.05),
    ParameterBound(name="sigma1", lower=0.01, upper=0.3),
)


def equilibrium_frame(results: Sequence[Tuple[Equilibrium, AggregateStats, WelfareReport]]) -> pd.DataFrame:
    """One row per solved policy point"""
    rows = []
    for eq, stats, report in results:
        row = {
            "i": eq.policy.i,
            "i_r": eq.policy.i_r,
            "chi": eq.policy.chi,
            "delta_bar": eq.policy.delta_bar,
            "regime": eq.regime.value,
            "i_d": eq.bank.i_d,
            "i_l": eq.bank.i_l,
            "lambda_L": eq.bank.lambda_L,
            "n": eq.bank.n,
            "r_tilde": eq.bank.r_tilde,
            "l_tilde": eq.bank.l_tilde,
            "m": eq.m,
            "r": eq.r,
            "l": eq.l,
            "delta_hat": eq.delta_hat,
        }
        for meeting in eq.meetings:
            row[f"q{meeting.j}"] = meeting.q
            row[f"p{meeting.j}"] = meeting.p
            row[f"credit{meeting.j}"] = meeting.credit_used
        row.update({
            "zeta": stats.zeta,
            "m1": stats.m1,
            "cd_ratio": stats.cd_ratio,
            "excess_ratio": stats.excess_ratio,
            "c_over_y": stats.c_over_y,
            "r_over_y": stats.r_over_y,
            "uc_over_y": stats.uc_over_y,
            "markup": stats.markup,
            "pi_over_y": stats.pi_over_y,
            "welfare_total": report.total,
        })
        rows.append(row)
    return pd.DataFrame(rows)


def series_frame(records: Sequence[SeriesRecord]) -> pd.DataFrame:
    """Simulated series in scenario order"""
    rows = []
    for record in records:
        row = record.model_dump()
        row["regime"] = record.regime.value
        rows.append(row)
    return pd.DataFrame(rows, columns=list(SeriesRecord.model_fields))


def run_solve(config: Config, points: Sequence[Tuple[float, float, float, float]]) -> pd.DataFrame:
    """Solve (i, i_r, chi, delta_bar) points"""
    analyzer = ScenarioAnalyzer(config)
    policies = [analyzer.policy(i, i_r, chi, delta_bar) for i, i_r, chi, delta_bar in points]
    return equilibrium_frame(analyzer.analyze_multiple_policies(policies))


def run_thresholds(config: Config, i_r_list: Sequence[float], chi: float) -> pd.DataFrame:
    """Regime boundaries in i for each reserve rate"""
    costs = config.params.bank_costs
    return pd.DataFrame([thresholds(costs, i_r, chi).model_dump() for i_r in i_r_list])


def run_sweep(
    config: Config,
    i_grid: Sequence[float],
    i_r_list: Sequence[float],
    delta_bar_list: Sequence[float],
    chi: float,
) -> pd.DataFrame:
    return ScenarioAnalyzer(config).sweep_policy(i_grid, i_r_list, delta_bar_list, chi)


def run_welfare(
    config: Config,
    i_grid: Sequence[float],
    pairs: Sequence[Tuple[float, float]],
    delta_bar: float = 0.0,
) -> pd.DataFrame:
    return ScenarioAnalyzer(config).welfare_surface(i_grid, pairs, delta_bar)


def run_simulation(
    config: Config,
    scenario_path: str,
    overrides: Optional[Dict[str, Override]] = None,
) -> pd.DataFrame:
    """Simulated (or counterfactual, with overrides) series for a scenario file"""
    scenario = load_scenario(scenario_path)
    records = ScenarioAnalyzer(config).run_series(scenario, overrides)
    return series_frame(records)


def regression_frame(results: Dict[str, RegressionResult], chow: Optional[ChowTestResult] = None) -> pd.DataFrame:
    """Long table: one row per (regression, coefficient)"""
    rows = []
    for name, result in results.items():
        for label, coefficient, std_error in zip(result.names, result.coefficients, result.std_errors):
            rows.append({
                "regression": name,
                "term": label,
                "coefficient": coefficient,
                "std_error": std_error,
                "p_value": None,
                "lag": result.lag,
                "nobs": result.nobs,
                "r_squared": result.r_squared,
            })
    if chow is not None:
        rows.append({
            "regression": "chow_zeta_cd_ratio",
            "term": "F",
            "coefficient": chow.f_stat,
            "std_error": None,
            "p_value": chow.p_value,
            "lag": 0,
            "nobs": chow.nobs,
            "r_squared": None,
        })
    return pd.DataFrame(rows)


def run_regressions(
    config: Config,
    scenario_path: str,
    pre_end: Optional[str] = None,
    post_start: Optional[str] = None,
    lag: int = 1,
    break_periods: Sequence[str] = (),
) -> pd.DataFrame:
    """Regressions on the model-implied series of a scenario file"""
    scenario = load_scenario(scenario_path)
    series = ScenarioAnalyzer(config).run_series(scenario)
    results = model_implied_regressions(series, pre_end, post_start, lag)
    chow = multiplier_break_test(series, break_periods) if break_periods else None
    return regression_frame(results, chow)


def run_calibration(
    config: Config,
    scenario_path: str,
    free: Sequence[ParameterBound] = DEFAULT_BOUNDS,
    targets: Sequence[CalibrationTarget] = DEFAULT_TARGETS,
) -> Tuple[CalibrationSpec, CalibrationResult]:
    spec = CalibrationSpec(
        free=tuple(free),
        initial=config.params,
        targets=tuple(targets),
        scenario=tuple(load_scenario(scenario_path)),
        starts=config.calibration_starts,
        seed=config.calibration_seed,
        max_iter=config.calibration_max_iter,
    )
    logger.info(f"Calibrating {[b.name for b in spec.free]} on {len(spec.scenario)} scenario rows")
    return spec, calibrate(spec, config.output_definition, config.threads, config.invariant_tol)


def calibration_report(spec: CalibrationSpec, result: CalibrationResult) -> str:
    """Structured key = value report of a calibration run"""
    lines: List[str] = ["[calibration]"]
    lines.append(f"objective = {format_float(result.objective)}")
    lines.append(f"starts = {len(result.starts)}")
    lines.append(f"seed = {spec.seed}")
    lines.append("")
    lines.append("[parameters]")
    free = {bound.name for bound in spec.free}
    for name, value in result.parameters.model_dump().items():
        tag = "free" if name in free else "fixed"
        lines.append(f"{name} = {format_float(value)}  # {tag}")
    lines.append("")
    lines.append("[targets]")
    for target in spec.targets:
        moment = result.moments.get(target.name)
        residual = result.residuals.get(target.name)
        lines.append(
            f"{target.name} = target {format_float(target.value)} model {format_float(moment)} "
            f"residual {format_float(residual)} weight {format_float(target.weight)}"
        )
    lines.append("")
    lines.append("[starts]")
    for log in result.starts:
        start = ", ".join(f"{n}={format_float(v)}" for n, v in log.start.items())
        lines.append(
            f"{log.index} = objective {format_float(log.objective)} iterations {log.iterations} "
            f"success {str(log.success).lower()} from {start}"
        )
    return "\n".join(lines) + "\n"
