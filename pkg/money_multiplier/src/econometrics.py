# src/econometrics.py
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import statsmodels.api as sm
from scipy import stats

from .errors import DegenerateSegmentError, SingularRegressionError
from .models import ChowTestResult, RegressionResult, SeriesRecord

logger = logging.getLogger(__name__)

# Regression specifications run on model output: (dependent, regressors, sample)
MODEL_REGRESSIONS: Dict[str, Tuple[str, Tuple[str, ...], str]] = {
    "r_over_y": ("r_over_y", ("uc_over_y", "i"), "pre"),
    "zeta": ("zeta", ("i", "i_r"), "post"),
    "excess_ratio": ("excess_ratio", ("i", "i_r"), "post"),
}


def _as_design(y: Sequence[float], X) -> Tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{y.shape[0]} observations but {X.shape[0]} regressor rows")
    return y, X


def ols_nw(
    y: Sequence[float],
    X,
    lag: int = 1,
    names: Optional[Sequence[str]] = None,
) -> RegressionResult:
    """Least squares with an intercept and Newey-West standard errors

    Bartlett weights 1 - s / (lag + 1); lag 0 is the White sandwich.
    """
    if lag < 0:
        raise ValueError(f"lag must be non-negative, got {lag}")
    y, X = _as_design(y, X)
    nobs, ncols = X.shape
    if not nobs > ncols + 1:
        raise SingularRegressionError(
            f"{nobs} observations are too few for {ncols} regressors and an intercept"
        )
    design = sm.add_constant(X, has_constant="add")
    if np.linalg.matrix_rank(design) < ncols + 1:
        raise SingularRegressionError(
            "regressors are collinear with each other or the intercept (zero-variance regressor?)"
        )
    model = sm.OLS(y, design)
    if lag == 0:
        fit = model.fit(cov_type="HC0")
    else:
        fit = model.fit(cov_type="HAC", cov_kwds={"maxlags": lag, "use_correction": False})

    labels = ("const",) + tuple(names or (f"x{j + 1}" for j in range(ncols)))
    if len(labels) != ncols + 1:
        raise ValueError(f"{len(labels) - 1} names for {ncols} regressors")
    return RegressionResult(
        names=labels,
        coefficients=tuple(float(c) for c in fit.params),
        std_errors=tuple(float(s) for s in fit.bse),
        lag=lag,
        r_squared=float(fit.rsquared),
        adj_r_squared=float(fit.rsquared_adj),
        residuals=tuple(float(e) for e in fit.resid),
        nobs=nobs,
    )


def _rss(result: RegressionResult) -> float:
    resid = np.asarray(result.residuals)
    return float(resid @ resid)


def chow_test(y: Sequence[float], X, breaks: Sequence[int]) -> ChowTestResult:
    """F test that intercept and slopes are equal across segments

    `breaks` are the row indices where a new segment starts. The unrestricted
    model interacts a shift dummy per segment with every regressor.
    """
    y, X = _as_design(y, X)
    nobs, ncols = X.shape
    breaks = tuple(sorted(int(b) for b in breaks))
    if not breaks:
        raise DegenerateSegmentError("at least one break index is required")
    edges = (0,) + breaks + (nobs,)
    for start, end in zip(edges[:-1], edges[1:]):
        if not end - start > ncols + 1:
            raise DegenerateSegmentError(
                f"segment [{start}, {end}) has {end - start} rows, needs more than {ncols + 1}"
            )

    restricted = ols_nw(y, X, lag=0)
    blocks = [X]
    for b in breaks:
        dummy = (np.arange(nobs) >= b).astype(float)[:, None]
        blocks.extend([dummy, dummy * X])
    unrestricted = ols_nw(y, np.hstack(blocks), lag=0)

    df_num = len(breaks) * (ncols + 1)
    df_den = nobs - (len(breaks) + 1) * (ncols + 1)
    tss = float(np.sum((y - y.mean()) ** 2))
    floor = np.finfo(float).eps * max(tss, 1.0)
    rss_r, rss_u = _rss(restricted), _rss(unrestricted)
    rss_r = 0.0 if rss_r <= floor else rss_r
    rss_u = 0.0 if rss_u <= floor else rss_u

    if rss_u == 0.0:
        f_stat = np.inf if rss_r > 0.0 else 0.0
    else:
        f_stat = max(0.0, ((rss_r - rss_u) / df_num) / (rss_u / df_den))
    p_value = 0.0 if np.isinf(f_stat) else float(stats.f.sf(f_stat, df_num, df_den))
    logger.debug(f"Chow test breaks={breaks}: F={f_stat!r} ({df_num}, {df_den})")
    return ChowTestResult(
        f_stat=float(f_stat),
        df_num=df_num,
        df_den=df_den,
        nobs=nobs,
        p_value=p_value,
        rss_restricted=rss_r,
        rss_unrestricted=rss_u,
        breaks=breaks,
    )


def chow_f(y: Sequence[float], X, breaks: Sequence[int]) -> float:
    return chow_test(y, X, breaks).f_stat


def _sample(series: List[SeriesRecord], start: Optional[str], end: Optional[str]) -> List[SeriesRecord]:
    periods = [rec.period for rec in series]
    for label in (start, end):
        if label is not None and label not in periods:
            raise ValueError(f"period '{label}' is not in the series")
    lo = periods.index(start) if start is not None else 0
    hi = periods.index(end) + 1 if end is not None else len(series)
    return series[lo:hi]


def _regress(records: List[SeriesRecord], dependent: str, regressors: Sequence[str], lag: int) -> RegressionResult:
    usable = [
        rec for rec in records
        if getattr(rec, dependent) is not None and all(getattr(rec, x) is not None for x in regressors)
    ]
    if len(usable) < len(records):
        logger.warning(
            f"Dropped {len(records) - len(usable)} periods without {dependent} from the regression"
        )
    if not usable:
        raise SingularRegressionError(f"no periods with {dependent} available")
    y = [getattr(rec, dependent) for rec in usable]
    X = [[getattr(rec, x) for x in regressors] for rec in usable]
    return ols_nw(y, X, lag=lag, names=regressors)


def model_implied_regressions(
    series: List[SeriesRecord],
    pre_end: Optional[str] = None,
    post_start: Optional[str] = None,
    lag: int = 1,
) -> Dict[str, RegressionResult]:
    """Reserve, multiplier and excess-reserve regressions on simulated series

    The reserve regression uses periods up to `pre_end`; the other two use
    periods from `post_start` on. Missing labels select the whole series.
    """
    samples = {
        "pre": _sample(series, None, pre_end),
        "post": _sample(series, post_start, None),
    }
    results = {}
    for name, (dependent, regressors, sample) in MODEL_REGRESSIONS.items():
        results[name] = _regress(samples[sample], dependent, regressors, lag)
        logger.info(f"Regression {name}: coefficients {results[name].coefficients}")
    return results


def multiplier_break_test(series: List[SeriesRecord], break_periods: Sequence[str]) -> ChowTestResult:
    """Chow test of the multiplier on the currency/deposit ratio at known periods"""
    records = [rec for rec in series if rec.cd_ratio is not None]
    periods = [rec.period for rec in records]
    missing = [p for p in break_periods if p not in periods]
    if missing:
        raise DegenerateSegmentError(f"break periods {missing} not in the banking part of the series")
    breaks = [periods.index(p) for p in break_periods]
    return chow_test([rec.zeta for rec in records], [rec.cd_ratio for rec in records], breaks)
