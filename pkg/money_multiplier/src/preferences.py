# src/preferences.py
"""DM preferences, proportional bargaining and the liquidity premium.

The buyer's DM utility is u(q) = B q^(1-b) / (1-b), the seller's cost is
c(q) = q and the terms of trade give the seller a payment
v(q) = (1 - theta) u(q) + theta c(q). lam(q) is the liquidity premium a
marginal unit of payment earns in the DM, and L(z) = lam(v^-1(z)) expresses
it in terms of real balances. L_inverse is money demand.
"""

import logging
import math

from .errors import DomainError
from .models import Preferences, TradeOutcome
from .rootfinding import bracketed_root

logger = logging.getLogger(__name__)

DOMAIN_SLACK = 1e-12
# Lower end of the quantity bracket, relative to q*
Q_FLOOR = 1e-14


def q_star(prefs: Preferences) -> float:
    """Efficient quantity, u'(q*) = c'(q*) = 1"""
    return prefs.B ** (1.0 / prefs.b)


def utility(prefs: Preferences, q: float) -> float:
    return prefs.B * q ** (1.0 - prefs.b) / (1.0 - prefs.b)


def marginal_utility(prefs: Preferences, q: float) -> float:
    if q <= 0.0:
        return math.inf
    return prefs.B * q ** (-prefs.b)


def cost(q: float) -> float:
    return q


def _check_quantity(prefs: Preferences, q: float) -> float:
    qs = q_star(prefs)
    if q < 0.0 or q > qs * (1.0 + DOMAIN_SLACK):
        raise DomainError(f"quantity q={q!r} outside [0, q*={qs!r}]")
    return min(q, qs)


def payment(prefs: Preferences, q: float) -> float:
    """Seller's payment v(q) for quantity q"""
    q = _check_quantity(prefs, q)
    return (1.0 - prefs.theta) * utility(prefs, q) + prefs.theta * cost(q)


def payment_prime(prefs: Preferences, q: float) -> float:
    return (1.0 - prefs.theta) * marginal_utility(prefs, q) + prefs.theta


def p_star(prefs: Preferences) -> float:
    """Payment that buys the efficient quantity"""
    return payment(prefs, q_star(prefs))


def payment_inverse(prefs: Preferences, p: float) -> float:
    """Quantity bought with payment p, 0 <= p <= p*"""
    ps = p_star(prefs)
    if p < 0.0 or p > ps + DOMAIN_SLACK * max(1.0, ps):
        raise DomainError(f"payment p={p!r} outside [0, p*={ps!r}]")
    if p == 0.0:
        return 0.0
    if p >= ps:
        return q_star(prefs)
    if prefs.theta == 1.0:
        return p
    return bracketed_root(
        lambda q: payment(prefs, q) - p,
        0.0,
        q_star(prefs),
        fprime=lambda q: payment_prime(prefs, q),
    )


def trade(prefs: Preferences, z: float) -> TradeOutcome:
    """Terms of trade for a buyer carrying liquidity z, q = min{q*, v^-1(z)}"""
    if z < 0.0:
        raise DomainError(f"liquidity z={z!r} is negative")
    ps = p_star(prefs)
    if z >= ps:
        return TradeOutcome(q=q_star(prefs), p=ps)
    return TradeOutcome(q=payment_inverse(prefs, z), p=z)


def liquidity_premium_bound(prefs: Preferences) -> float:
    """Supremum of lam(q) as q -> 0, theta / (1 - theta)"""
    if prefs.theta == 1.0:
        return math.inf
    return prefs.theta / (1.0 - prefs.theta)


def liquidity_premium(prefs: Preferences, q: float) -> float:
    """lam(q) = theta (u'(q) - 1) / ((1 - theta) u'(q) + theta)"""
    if q <= 0.0:
        raise DomainError(f"liquidity premium needs q > 0, got q={q!r}")
    q = _check_quantity(prefs, q)
    if q >= q_star(prefs):
        return 0.0
    x = marginal_utility(prefs, q)
    return prefs.theta * (x - 1.0) / ((1.0 - prefs.theta) * x + prefs.theta)


def liquidity_premium_prime(prefs: Preferences, q: float) -> float:
    x = marginal_utility(prefs, q)
    denom = (1.0 - prefs.theta) * x + prefs.theta
    return -prefs.theta * prefs.b * x / (q * denom * denom)


def L(prefs: Preferences, z: float) -> float:
    """Liquidity premium as a function of real balances; 0 beyond p*"""
    if z <= 0.0:
        raise DomainError(f"L needs positive balances, got z={z!r}")
    if z >= p_star(prefs):
        return 0.0
    return liquidity_premium(prefs, payment_inverse(prefs, z))


def L_inverse(prefs: Preferences, i: float) -> float:
    """Real balances z with L(z) = i"""
    if i < 0.0:
        raise DomainError(f"rate i={i!r} is negative")
    if i == 0.0:
        return p_star(prefs)
    if i >= liquidity_premium_bound(prefs):
        # No balance earns a premium this high
        return 0.0
    qs = q_star(prefs)
    lo = qs * Q_FLOOR

    def gap(q: float) -> float:
        return liquidity_premium(prefs, q) - i

    if gap(lo) <= 0.0:
        logger.debug(f"L_inverse({i!r}) below quantity floor, returning 0")
        return 0.0
    q = bracketed_root(gap, lo, qs, fprime=lambda q: liquidity_premium_prime(prefs, q))
    return payment(prefs, q)
