# src/rootfinding.py
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import SolverError

logger = logging.getLogger(__name__)

XTOL = 1e-15
RTOL = 4 * np.finfo(float).eps
MAX_DOUBLINGS = 60


def bracketed_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    fprime: Optional[Callable[[float], float]] = None,
    endpoint_tol: float = 0.0,
    xtol: float = XTOL,
) -> float:
    """Root of a monotone function on [lo, hi]

    Brent's method to `xtol`, then one Newton step that is kept only if it
    stays inside the bracket and lowers |f|. Endpoints with |f| <= endpoint_tol
    count as roots.
    """
    f_lo, f_hi = f(lo), f(hi)
    if abs(f_lo) <= endpoint_tol:
        return lo
    if abs(f_hi) <= endpoint_tol:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise SolverError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}"
        )
    root = brentq(f, lo, hi, xtol=xtol, rtol=RTOL, maxiter=500)
    if fprime is None:
        return root
    return newton_polish(f, fprime, root, lo, hi)


def newton_polish(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    x: float,
    lo: float,
    hi: float,
) -> float:
    fx = f(x)
    slope = fprime(x)
    if fx == 0.0 or not math.isfinite(slope) or slope == 0.0:
        return x
    candidate = x - fx / slope
    if lo <= candidate <= hi and abs(f(candidate)) < abs(fx):
        return candidate
    return x


def expand_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    max_doublings: int = MAX_DOUBLINGS,
) -> Tuple[float, float]:
    """Double `hi` until f changes sign on [lo, hi]"""
    f_lo = f(lo)
    for _ in range(max_doublings + 1):
        if np.sign(f(hi)) != np.sign(f_lo):
            return lo, hi
        hi *= 2.0
    logger.error(f"Bracket growth failed after {max_doublings} doublings from lo={lo!r}")
    raise SolverError(
        f"no sign change found on [{lo!r}, {hi!r}] after {max_doublings} doublings; "
        "check the cost parameters"
    )
