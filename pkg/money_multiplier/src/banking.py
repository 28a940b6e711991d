# src/banking.py
import logging
import math
from typing import Tuple

from .errors import DomainError
from .models import BankAllocation, BankCostParams, PolicyPoint
from .rootfinding import bracketed_root, expand_bracket

logger = logging.getLogger(__name__)

RESERVE_FLOOR = 1e-10


def _nonnegative(name: str, value: float) -> None:
    if value < 0.0:
        raise DomainError(f"{name}={value!r} must be non-negative")


def kappa(chi: float) -> float:
    """Loans per unit of reserves at a binding requirement"""
    if not 0.0 < chi <= 1.0:
        raise DomainError(f"reserve requirement chi={chi!r} outside (0, 1]")
    return (1.0 - chi) / chi


def gamma(costs: BankCostParams, d: float) -> float:
    """Deposit-service cost A d^a"""
    _nonnegative("deposits", d)
    return costs.A * d ** costs.a


def gamma_prime(costs: BankCostParams, d: float) -> float:
    """Marginal deposit-service cost a A d^(a-1)"""
    _nonnegative("deposits", d)
    return costs.A * costs.a * d ** (costs.a - 1.0)


def gamma_double_prime(costs: BankCostParams, d: float) -> float:
    _nonnegative("deposits", d)
    if d == 0.0 and costs.a < 2.0:
        return math.inf
    return costs.A * costs.a * (costs.a - 1.0) * d ** (costs.a - 2.0)


def gamma_prime_inverse(costs: BankCostParams, y: float) -> float:
    """Deposits at which the marginal service cost equals y"""
    _nonnegative("marginal deposit cost", y)
    return (y / (costs.A * costs.a)) ** (1.0 / (costs.a - 1.0))


def eta(costs: BankCostParams, l: float) -> float:
    """Enforcement cost E l^2"""
    _nonnegative("loans", l)
    return costs.E * l * l


def eta_prime(costs: BankCostParams, l: float) -> float:
    """Marginal enforcement cost 2 E l"""
    _nonnegative("loans", l)
    return 2.0 * costs.E * l


def eta_prime_inverse(costs: BankCostParams, y: float) -> float:
    """Loans at which the marginal enforcement cost equals y"""
    _nonnegative("marginal enforcement cost", y)
    return y / (2.0 * costs.E)


def deposit_rent(costs: BankCostParams, r: float) -> float:
    """gamma'(r) r - gamma(r), the bank's inframarginal deposit rent"""
    return gamma_prime(costs, r) * r - gamma(costs, r)


def loan_rent(costs: BankCostParams, l: float) -> float:
    """eta'(l) l - eta(l)"""
    return eta_prime(costs, l) * l - eta(costs, l)


def entry_locus(costs: BankCostParams, r: float, chi: float) -> float:
    """Left side of the free-entry locus with a binding lending constraint"""
    return deposit_rent(costs, r) + loan_rent(costs, kappa(chi) * r)


def r_hat(costs: BankCostParams, chi: float) -> float:
    """Reserves per bank on the free-entry locus when lending is constrained"""
    kap = kappa(chi)

    def excess_profit(r: float) -> float:
        return entry_locus(costs, r, chi) - costs.k

    def slope(r: float) -> float:
        return gamma_double_prime(costs, r) * r + 2.0 * costs.E * kap * kap * r

    lo, hi = expand_bracket(excess_profit, RESERVE_FLOOR, 1.0)
    root = bracketed_root(excess_profit, lo, hi, fprime=slope)
    logger.debug(f"r_hat(chi={chi!r}) = {root!r}")
    return root


def r_lower(costs: BankCostParams) -> float:
    """Reserves per bank on the entry locus without lending"""
    return (costs.k / (costs.A * (costs.a - 1.0))) ** (1.0 / costs.a)


def entry_loan(costs: BankCostParams, r: float) -> float:
    """Loans per bank that restore zero profit at reserves r with slack lending

    Solves eta'(l) l - eta(l) = k - (gamma'(r) r - gamma(r)); with quadratic
    enforcement costs the left side is E l^2.
    """
    if r >= r_lower(costs):
        return 0.0
    shortfall = costs.k - deposit_rent(costs, r)
    return math.sqrt(max(0.0, shortfall) / costs.E)


def entry_loan_prime(costs: BankCostParams, r: float) -> float:
    l = entry_loan(costs, r)
    if l == 0.0:
        return -math.inf
    return -gamma_double_prime(costs, r) * r / (2.0 * costs.E * l)


def bank_foc_residuals(
    costs: BankCostParams, alloc: BankAllocation, policy: PolicyPoint
) -> Tuple[float, float]:
    """Residuals of the reserve and loan first-order conditions"""
    reserves = (
        policy.i_r
        - alloc.i_d
        - gamma_prime(costs, alloc.r_tilde)
        + alloc.lambda_L * policy.kappa
    )
    loans = alloc.i_l - eta_prime(costs, alloc.l_tilde) - alloc.lambda_L
    return reserves, loans


def entry_profit(costs: BankCostParams, alloc: BankAllocation, policy: PolicyPoint) -> float:
    """Bank profit net of the entry cost"""
    revenue = (policy.i_r - alloc.i_d) * alloc.r_tilde + alloc.i_l * alloc.l_tilde
    return revenue - gamma(costs, alloc.r_tilde) - eta(costs, alloc.l_tilde) - costs.k
