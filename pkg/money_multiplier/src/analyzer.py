# src/analyzer.py
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .aggregates import aggregates, welfare
from .calibration import solve_with_backout
from .config import Config
from .equilibrium import solve
from .errors import ToolkitError, row_failure
from .models import AggregateStats, Equilibrium, PolicyPoint, ScenarioRow, SeriesRecord, WelfareReport

logger = logging.getLogger(__name__)

OVERRIDE_KEYS = ("chi", "i_r", "i", "delta_bar")

Override = Union[float, Sequence[float]]


def _override_at(value: Override, index: int) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    return float(value[index])


class ScenarioAnalyzer:
    """Runs the solver across policy points, scenarios and grids"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.params = self.config.params
        self.prefs = self.params.preferences
        self.costs = self.params.bank_costs
        self.definition = self.config.output_definition
        self.share = self.config.welfare_share
        self.tol = self.config.invariant_tol
        self.threads = self.config.threads

    def policy(self, i: float, i_r: float, chi: float, delta_bar: float = 0.0) -> PolicyPoint:
        return self.params.policy(i, i_r, chi, delta_bar)

    def analyze_policy(self, policy: PolicyPoint) -> Tuple[Equilibrium, AggregateStats, WelfareReport]:
        """Solve one policy point and derive its statistics"""
        eq = solve(self.prefs, self.costs, policy, self.tol)
        return (
            eq,
            aggregates(eq, self.prefs, self.costs, self.definition),
            welfare(eq, self.prefs, self.share),
        )

    def analyze_multiple_policies(
        self, policies: Sequence[PolicyPoint]
    ) -> List[Tuple[Equilibrium, AggregateStats, WelfareReport]]:
        """Solve many independent points, in parallel when threads > 1"""
        if self.threads == 1 or len(policies) < 2:
            return [self.analyze_policy(p) for p in policies]
        return Parallel(n_jobs=self.threads)(delayed(self.analyze_policy)(p) for p in policies)

    def _series_record(self, row: ScenarioRow, changes: Dict[str, float]) -> SeriesRecord:
        detail = f"i={row.i}, i_r={row.i_r}, chi={row.chi}"
        try:
            observed = self.policy(row.i, row.i_r, row.chi)
            if "delta_bar" in changes:
                delta_bar = changes["delta_bar"]
            else:
                delta_bar, _ = solve_with_backout(
                    self.prefs, self.costs, observed, row.uc_over_y_obs, self.definition, self.tol
                )
            policy = observed.with_changes(**{"delta_bar": delta_bar, **changes})
            eq, stats, report = self.analyze_policy(policy)
        except (ToolkitError, ValueError) as e:
            logger.error(f"Failed to solve period {row.period}: {e}")
            raise row_failure(row.period, f"{detail}, overrides={changes}", e) from e
        return SeriesRecord(
            period=row.period,
            regime=eq.regime,
            i=policy.i,
            i_r=policy.i_r,
            chi=policy.chi,
            delta_bar=policy.delta_bar,
            zeta=stats.zeta,
            excess_ratio=stats.excess_ratio,
            cd_ratio=stats.cd_ratio,
            r_over_y=stats.r_over_y,
            c_over_y=stats.c_over_y,
            uc_over_y=stats.uc_over_y,
            m=eq.m,
            required=stats.required,
            excess=stats.excess,
            m0=stats.m0,
            welfare_total=report.total,
        )

    def run_series(
        self,
        scenario: Sequence[ScenarioRow],
        overrides: Optional[Dict[str, Override]] = None,
    ) -> List[SeriesRecord]:
        """One record per scenario row, in input order

        The credit limit is backed out under the observed policy first; the
        overrides (constants or per-row series) are applied afterwards.
        """
        overrides = overrides or {}
        for key, value in overrides.items():
            if key not in OVERRIDE_KEYS:
                raise ValueError(f"cannot override '{key}'; choose from {OVERRIDE_KEYS}")
            if not isinstance(value, (int, float)) and len(value) != len(scenario):
                raise ValueError(
                    f"override series for {key} has {len(value)} values, scenario has {len(scenario)} rows"
                )
        changes = [
            {key: _override_at(value, k) for key, value in overrides.items()}
            for k in range(len(scenario))
        ]
        logger.info(f"Solving {len(scenario)} periods with overrides {sorted(overrides)}")
        if self.threads == 1 or len(scenario) < 2:
            return [self._series_record(row, c) for row, c in zip(scenario, changes)]
        return Parallel(n_jobs=self.threads)(
            delayed(self._series_record)(row, c) for row, c in zip(scenario, changes)
        )

    def sweep_policy(
        self,
        i_grid: Sequence[float],
        i_r_list: Sequence[float],
        delta_bar_list: Sequence[float],
        chi: float,
    ) -> pd.DataFrame:
        """Demand for reserves, broad money and currency over (i, i_r, delta_bar)"""
        if not len(i_grid) or not len(i_r_list) or not len(delta_bar_list):
            raise ValueError("sweep grids must be non-empty")
        points = [
            self.policy(i, i_r, chi, delta_bar)
            for delta_bar in delta_bar_list
            for i_r in i_r_list
            for i in i_grid
        ]
        rows = []
        for policy, (eq, stats, _) in zip(points, self.analyze_multiple_policies(points)):
            rows.append({
                "i": policy.i,
                "i_r": policy.i_r,
                "chi": policy.chi,
                "delta_bar": policy.delta_bar,
                "regime": eq.regime.value,
                "r": eq.r,
                "l": eq.l,
                "m": eq.m,
                "m1": stats.m1,
                "zeta": stats.zeta,
                "c_over_y": stats.c_over_y,
                "cd_ratio": stats.cd_ratio,
            })
        return pd.DataFrame(rows)

    def welfare_surface(
        self,
        i_grid: Sequence[float],
        pairs: Sequence[Tuple[float, float]],
        delta_bar: float = 0.0,
    ) -> pd.DataFrame:
        """Welfare per agent and in total over i for each (chi, i_r) curve"""
        if not len(i_grid) or not len(pairs):
            raise ValueError("welfare grids must be non-empty")
        points = [self.policy(i, i_r, chi, delta_bar) for chi, i_r in pairs for i in i_grid]
        rows = []
        for policy, (eq, _, report) in zip(points, self.analyze_multiple_policies(points)):
            row = {
                "chi": policy.chi,
                "i_r": policy.i_r,
                "i": policy.i,
                "regime": eq.regime.value,
                "total": report.total,
                "dispersion": report.dispersion,
            }
            for j in range(3):
                row[f"jb{j + 1}"] = report.jb[j]
                row[f"js{j + 1}"] = report.js[j]
            rows.append(row)
        table = pd.DataFrame(rows)
        check_welfare_monotone(table)
        return table


def check_welfare_monotone(table: pd.DataFrame) -> Dict[Tuple[float, float], bool]:
    """Whether total welfare falls with i along every (chi, i_r) curve"""
    verdicts = {}
    for (chi, i_r), curve in table.groupby(["chi", "i_r"], sort=False):
        totals = curve.sort_values("i")["total"].to_numpy()
        monotone = bool(np.all(np.diff(totals) <= 0.0))
        if not monotone:
            logger.warning(f"Welfare is not decreasing in i along chi={chi}, i_r={i_r}")
        verdicts[(float(chi), float(i_r))] = monotone
    return verdicts
