# src/statics.py
"""Finite-difference comparative statics of equilibrium statistics."""

from typing import Callable

from .equilibrium import solve
from .models import BankCostParams, Equilibrium, PolicyPoint, Preferences

Statistic = Callable[[Equilibrium], float]

POLICY_FIELDS = ("i", "i_r", "chi", "delta_bar", "sigma3")


def perturb(policy: PolicyPoint, name: str, delta: float) -> PolicyPoint:
    """Shift one policy coordinate; sigma3 moves at the expense of sigma2"""
    if name == "sigma3":
        s1, s2, s3 = policy.sigma
        return policy.with_changes(sigma=(s1, s2 - delta, s3 + delta))
    if name not in POLICY_FIELDS:
        raise ValueError(f"cannot perturb '{name}'; choose from {POLICY_FIELDS}")
    return policy.with_changes(**{name: getattr(policy, name) + delta})


def partial_derivative(
    prefs: Preferences,
    costs: BankCostParams,
    policy: PolicyPoint,
    statistic: Statistic,
    name: str,
    h: float = 1e-5,
) -> float:
    """Centered difference of statistic(solve(policy)) in one coordinate"""
    up = statistic(solve(prefs, costs, perturb(policy, name, h)))
    down = statistic(solve(prefs, costs, perturb(policy, name, -h)))
    return (up - down) / (2.0 * h)


def cross_partial(
    prefs: Preferences,
    costs: BankCostParams,
    policy: PolicyPoint,
    statistic: Statistic,
    first: str,
    second: str,
    h: float = 1e-4,
) -> float:
    """Centered second difference in two distinct coordinates"""

    def at(s1: float, s2: float) -> float:
        shifted = perturb(perturb(policy, first, s1 * h), second, s2 * h)
        return statistic(solve(prefs, costs, shifted))

    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h)
