# src/calibration.py
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import ValidationError
from scipy.optimize import brentq, minimize
from tqdm import tqdm

from .aggregates import aggregates, output
from .econometrics import ols_nw
from .equilibrium import DEFAULT_TOL, solve
from .errors import (
    CalibrationInfeasibleError,
    InfeasibleTargetError,
    ToolkitError,
    row_failure,
)
from .models import (
    BankCostParams,
    CalibrationResult,
    CalibrationSpec,
    CalibrationTarget,
    Equilibrium,
    ModelParameters,
    OutputDefinition,
    PolicyPoint,
    Preferences,
    ScenarioRow,
    StartLog,
)
from .preferences import p_star

logger = logging.getLogger(__name__)

BACKOUT_TOL = 1e-9
PENALTY = 1e10
SIMPLEX_RESTARTS = 4

AVERAGED_MOMENTS = (
    "markup",
    "uc_over_dm",
    "r_over_y",
    "pi_over_y",
    "cd_ratio",
    "c_over_y",
    "pi_over_d",
)


def _uc_over_y(eq: Equilibrium, prefs: Preferences, definition: OutputDefinition) -> float:
    return eq.policy.sigma[2] * eq.meeting(3).credit_used / output(eq, prefs, definition)


def solve_with_backout(
    prefs: Preferences,
    costs: BankCostParams,
    policy: PolicyPoint,
    uc_over_y_obs: float,
    definition: OutputDefinition = OutputDefinition.UTILITY_SCALE,
    tol: float = DEFAULT_TOL,
) -> Tuple[float, Equilibrium]:
    """Credit limit matching an observed credit/output ratio, and the equilibrium at it

    Only meeting-3 liquidity depends on the limit: it is the limit-free
    level z3 while delta_bar stays below it and min(delta_bar, p*) above, so
    the ratio has a closed form on each piece. The result is checked on the
    solved model and falls back to bracketing on [0, p*].
    """
    if uc_over_y_obs < 0.0:
        raise ValueError(f"observed credit/output ratio {uc_over_y_obs!r} is negative")
    base = solve(prefs, costs, policy.with_changes(delta_bar=0.0), tol)
    if uc_over_y_obs == 0.0:
        return 0.0, base

    sigma3 = policy.sigma[2]
    ps = p_star(prefs)
    y0 = output(base, prefs, definition)
    z3_free = base.meeting(3).z
    y_rest = y0 - sigma3 * z3_free
    supremum = sigma3 * ps / (y_rest + sigma3 * ps)
    if uc_over_y_obs > supremum * (1.0 + 1e-12):
        raise InfeasibleTargetError(
            f"credit/output ratio {uc_over_y_obs!r} exceeds the attainable supremum {supremum!r}",
            supremum=supremum,
        )

    delta_bar = uc_over_y_obs * y0 / sigma3
    if delta_bar > z3_free:
        delta_bar = min(ps, uc_over_y_obs * y_rest / (sigma3 * (1.0 - uc_over_y_obs)))
    eq = solve(prefs, costs, policy.with_changes(delta_bar=delta_bar), tol)
    if abs(_uc_over_y(eq, prefs, definition) - uc_over_y_obs) <= BACKOUT_TOL:
        return delta_bar, eq

    logger.warning(
        f"Closed-form credit limit missed the target at i={policy.i!r}; bisecting on [0, p*]"
    )

    def gap(db: float) -> float:
        trial = solve(prefs, costs, policy.with_changes(delta_bar=db), tol)
        return _uc_over_y(trial, prefs, definition) - uc_over_y_obs

    delta_bar = brentq(gap, 0.0, ps, xtol=1e-15)
    return delta_bar, solve(prefs, costs, policy.with_changes(delta_bar=delta_bar), tol)


def backout_delta(
    prefs: Preferences,
    costs: BankCostParams,
    policy: PolicyPoint,
    uc_over_y_obs: float,
    definition: OutputDefinition = OutputDefinition.UTILITY_SCALE,
) -> float:
    """Unsecured credit limit implied by an observed credit/output ratio"""
    delta_bar, _ = solve_with_backout(prefs, costs, policy, uc_over_y_obs, definition)
    return delta_bar


def semi_elasticity(rates: Sequence[float], c_over_y: Sequence[float]) -> Optional[float]:
    """Slope of ln(C/Y) on i; absent when the rate never varies"""
    rates = np.asarray(rates, dtype=float)
    if len(rates) < 2 or np.var(rates) == 0.0 or min(c_over_y) <= 0.0:
        return None
    logs = np.log(np.asarray(c_over_y, dtype=float))
    if len(rates) == 2:
        # exact line through both points; ols_nw needs a residual degree of freedom
        return float((logs[1] - logs[0]) / (rates[1] - rates[0]))
    fit = ols_nw(logs, rates, lag=0, names=("i",))
    return fit.coefficient("i")


def model_moments(
    params: ModelParameters,
    scenario: Sequence[ScenarioRow],
    definition: OutputDefinition = OutputDefinition.UTILITY_SCALE,
    tol: float = DEFAULT_TOL,
) -> Dict[str, Optional[float]]:
    """Time averages of the targeted statistics over a scenario"""
    prefs, costs = params.preferences, params.bank_costs
    columns: Dict[str, List[float]] = {name: [] for name in AVERAGED_MOMENTS}
    c_over_y: List[float] = []
    for row in scenario:
        policy = params.policy(row.i, row.i_r, row.chi)
        try:
            _, eq = solve_with_backout(prefs, costs, policy, row.uc_over_y_obs, definition, tol)
        except ToolkitError as e:
            raise row_failure(row.period, f"i={row.i}, i_r={row.i_r}, chi={row.chi}", e) from e
        stats = aggregates(eq, prefs, costs, definition)
        c_over_y.append(stats.c_over_y)
        for name in AVERAGED_MOMENTS:
            value = getattr(stats, name)
            if value is not None:
                columns[name].append(value)

    moments: Dict[str, Optional[float]] = {
        name: (float(np.mean(values)) if values else None) for name, values in columns.items()
    }
    moments["semi_elasticity"] = semi_elasticity([row.i for row in scenario], c_over_y)
    return moments


def target_residuals(
    moments: Dict[str, Optional[float]], targets: Sequence[CalibrationTarget]
) -> Dict[str, Optional[float]]:
    """Relative residual (moment - target) / target per target"""
    residuals: Dict[str, Optional[float]] = {}
    for target in targets:
        value = moments.get(target.name)
        residuals[target.name] = None if value is None else (value - target.value) / target.value
    return residuals


def objective(moments: Dict[str, Optional[float]], targets: Sequence[CalibrationTarget]) -> float:
    """Weighted sum of squared relative residuals; zero weights and absent moments drop out"""
    residuals = target_residuals(moments, targets)
    total = 0.0
    for target in targets:
        residual = residuals[target.name]
        if target.weight == 0.0 or residual is None:
            continue
        total += target.weight * residual * residual
    return total


class MomentCalibrator:
    """Multi-start bounded Nelder-Mead fit of free parameters to target moments"""

    def __init__(
        self,
        spec: CalibrationSpec,
        definition: OutputDefinition = OutputDefinition.UTILITY_SCALE,
        n_jobs: int = 1,
        tol: float = DEFAULT_TOL,
    ):
        self.spec = spec
        self.definition = definition
        self.n_jobs = n_jobs
        self.tol = tol
        self.names = [bound.name for bound in spec.free]
        self.lower = np.array([bound.lower for bound in spec.free])
        self.upper = np.array([bound.upper for bound in spec.free])

    def parameters_at(self, x: np.ndarray) -> ModelParameters:
        x = np.clip(x, self.lower, self.upper)
        return self.spec.initial.with_changes(**{n: float(v) for n, v in zip(self.names, x)})

    def evaluate(self, x: np.ndarray) -> float:
        """Objective at a trial vector; unsolvable points get a flat penalty"""
        try:
            params = self.parameters_at(x)
            moments = model_moments(params, self.spec.scenario, self.definition, self.tol)
        except (ToolkitError, ValidationError, ValueError, ArithmeticError) as e:
            logger.debug(f"Penalized trial {dict(zip(self.names, x))}: {e}")
            return PENALTY
        value = objective(moments, self.spec.targets)
        return value if math.isfinite(value) else PENALTY

    def starting_points(self) -> List[np.ndarray]:
        """Initial guess first, then uniform draws inside the bounds"""
        rng = np.random.default_rng(self.spec.seed)
        first = np.array([getattr(self.spec.initial, n) for n in self.names], dtype=float)
        draws = [rng.uniform(self.lower, self.upper) for _ in range(self.spec.starts - 1)]
        return [first] + draws

    def _simplex(self, x0: np.ndarray):
        return minimize(
            self.evaluate,
            x0,
            method="Nelder-Mead",
            bounds=list(zip(self.lower, self.upper)),
            options={
                "maxiter": self.spec.max_iter,
                "maxfev": 2 * self.spec.max_iter,
                "xatol": 1e-10,
                "fatol": 1e-16,
                "adaptive": len(x0) > 2,
            },
        )

    def _run_start(self, index: int, x0: np.ndarray) -> Tuple[np.ndarray, StartLog]:
        """Simplex search from x0, restarted from its own optimum until it stalls"""
        result = self._simplex(x0)
        iterations = int(result.nit)
        for _ in range(SIMPLEX_RESTARTS):
            if result.fun == 0.0 or result.fun >= PENALTY:
                break
            again = self._simplex(result.x)
            iterations += int(again.nit)
            if not again.fun < result.fun:
                break
            result = again
        log = StartLog(
            index=index,
            start={n: float(v) for n, v in zip(self.names, x0)},
            objective=float(result.fun),
            iterations=iterations,
            success=bool(result.success),
            message=str(result.message),
        )
        return np.clip(result.x, self.lower, self.upper), log

    def run(self) -> CalibrationResult:
        starts = self.starting_points()
        logger.info(f"Calibrating {self.names} from {len(starts)} starts")
        runs = Parallel(n_jobs=self.n_jobs)(
            delayed(self._run_start)(k, x0)
            for k, x0 in enumerate(tqdm(starts, desc="calibration starts", disable=None))
        )
        logs = [log for _, log in runs]
        best_index = min(range(len(runs)), key=lambda k: (logs[k].objective, k))
        best_x, best_log = runs[best_index]
        if best_log.objective >= PENALTY:
            raise CalibrationInfeasibleError(
                f"none of {len(starts)} starts reached a solvable parameter point"
            )

        params = self.parameters_at(best_x)
        moments = model_moments(params, self.spec.scenario, self.definition, self.tol)
        logger.info(f"Best start {best_index}: objective {best_log.objective!r}")
        return CalibrationResult(
            parameters=params,
            objective=objective(moments, self.spec.targets),
            moments=moments,
            residuals=target_residuals(moments, self.spec.targets),
            starts=logs,
        )


def calibrate(
    spec: CalibrationSpec,
    definition: OutputDefinition = OutputDefinition.UTILITY_SCALE,
    n_jobs: int = 1,
    tol: float = DEFAULT_TOL,
) -> CalibrationResult:
    """Multi-start fit of the free parameters in `spec`"""
    return MomentCalibrator(spec, definition, n_jobs, tol).run()
