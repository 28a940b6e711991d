# src/equilibrium.py
"""Regime classification and the three stationary-equilibrium solvers.

Buyers in meeting 1 pay with cash only. Meeting-2 buyers can also use bank
liabilities (deposits and banknotes) and meeting-3 buyers additionally hold
an unsecured credit line delta_bar. Banks take reserves r and make loans l
per bank, and free entry pins down the measure of banks n.
"""

import logging
import math
from typing import List, Tuple

from . import banking
from .errors import ClassificationInconsistencyError, DegeneratePolicyError, SolverError
from .models import (
    BankAllocation,
    BankCostParams,
    Equilibrium,
    MeetingOutcome,
    PolicyPoint,
    Preferences,
    Regime,
    Thresholds,
)
from .preferences import L_inverse, p_star, payment, trade
from .rootfinding import bracketed_root

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
# Pricing residual accepted at an endpoint of the reserve bracket
ENDPOINT_TOL = 1e-14
# Rounding allowance on the multiplier of the lending constraint
MULTIPLIER_SLACK = 1e-12


def thresholds(costs: BankCostParams, i_r: float, chi: float) -> Thresholds:
    """Nominal-rate thresholds separating the three regimes at (i_r, chi)"""
    if chi == 1.0:
        raise DegeneratePolicyError(
            "chi=1 leaves no lending capacity; the scarce-entry threshold divides by 1 - chi"
        )
    if not 0.0 < chi < 1.0:
        raise DegeneratePolicyError(f"thresholds need chi in (0, 1), got chi={chi!r}")
    kap = banking.kappa(chi)
    rh = banking.r_hat(costs, chi)
    rl = banking.r_lower(costs)
    gp_hat = banking.gamma_prime(costs, rh)
    gp_lower = banking.gamma_prime(costs, rl)
    ep_hat = banking.eta_prime(costs, kap * rh)

    i_hat = (gp_hat - i_r) / kap + ep_hat
    i_bar = (1.0 + i_r - gp_hat) * (1.0 + ep_hat) - 1.0
    i_lower = i_r - gp_lower

    if i_r > gp_hat:
        # Ample deposits pay a positive rate only above this locus
        r_zero_rate = min(banking.gamma_prime_inverse(costs, i_r), rl)
        i_floor = max(i_lower, banking.eta_prime(costs, banking.entry_loan(costs, r_zero_rate)))
        if i_r < gp_lower:
            logger.debug(
                f"i_r={i_r!r} between gamma'(r_hat)={gp_hat!r} and gamma'(r_lower)={gp_lower!r}: "
                f"no-banking boundary at i={i_floor!r} instead of i_lower={i_lower!r}"
            )
    else:
        i_floor = i_hat

    return Thresholds(
        i_r=i_r,
        chi=chi,
        i_lower=i_lower,
        i_hat=i_hat,
        i_bar=i_bar,
        i_floor=i_floor,
        r_hat=rh,
        r_lower=rl,
        gamma_prime_r_hat=gp_hat,
        gamma_prime_r_lower=gp_lower,
    )


def classify(costs: BankCostParams, policy: PolicyPoint) -> Regime:
    """Regime at a policy point; boundary points go to the regime with fewer banks"""
    i, i_r = policy.i, policy.i_r
    if policy.chi == 1.0:
        # Without lending only the deposit margin is left
        i_lower = i_r - banking.gamma_prime(costs, banking.r_lower(costs))
        if i_lower > 0.0 and i > i_lower:
            return Regime.SCARCE
        return Regime.NO_BANKING

    t = thresholds(costs, i_r, policy.chi)
    if i_r > t.gamma_prime_r_hat:
        if i >= t.i_bar:
            return Regime.SCARCE
        if i > t.i_floor:
            return Regime.AMPLE
        return Regime.NO_BANKING
    if i > t.i_hat:
        return Regime.SCARCE
    return Regime.NO_BANKING


def _meeting(
    prefs: Preferences,
    j: int,
    i_d: float,
    m: float = 0.0,
    d: float = 0.0,
    l: float = 0.0,
    credit_used: float = 0.0,
) -> MeetingOutcome:
    z = m + (1.0 + i_d) * d + l + credit_used
    outcome = trade(prefs, z)
    return MeetingOutcome(j=j, q=outcome.q, p=outcome.p, z=z, m=m, d=d, l=l, credit_used=credit_used)


def _bank_liquidity(prefs: Preferences, policy: PolicyPoint, delta_hat: float) -> Tuple[float, float, float]:
    """Bank-provided liquidity per buyer type and the credit used in meeting 3"""
    if delta_hat > policy.delta_bar:
        return delta_hat, delta_hat - policy.delta_bar, policy.delta_bar
    return delta_hat, 0.0, min(policy.delta_bar, p_star(prefs))


def _banking_meetings(
    prefs: Preferences,
    policy: PolicyPoint,
    i_d: float,
    delta_hat: float,
    deposit_share: float,
    loan_share: float,
) -> Tuple[Tuple[MeetingOutcome, MeetingOutcome, MeetingOutcome], float]:
    """Meeting outcomes when banks operate; returns them with sum sigma_j b_j

    Each unit of bank liquidity b is split into deposits b * deposit_share and
    banknotes b * loan_share with (1 + i_d) deposit_share + loan_share = 1.
    Buyers in meetings 2 and 3 hold no cash since deposits pay i_d > 0.
    """
    cash = L_inverse(prefs, policy.i)
    b2, b3, credit3 = _bank_liquidity(prefs, policy, delta_hat)
    meetings = (
        _meeting(prefs, 1, i_d, m=cash),
        _meeting(prefs, 2, i_d, d=b2 * deposit_share, l=b2 * loan_share),
        _meeting(prefs, 3, i_d, d=b3 * deposit_share, l=b3 * loan_share, credit_used=credit3),
    )
    _, sigma2, sigma3 = policy.sigma
    return meetings, sigma2 * b2 + sigma3 * b3


def _aggregate(policy: PolicyPoint, meetings, attribute: str) -> float:
    return sum(s * getattr(mt, attribute) for s, mt in zip(policy.sigma, meetings))


def solve_no_banking(prefs: Preferences, policy: PolicyPoint) -> Equilibrium:
    """Cash and free credit only; no bank is active and deposits pay nothing"""
    cash = L_inverse(prefs, policy.i)
    m3 = max(0.0, cash - policy.delta_bar)
    credit3 = max(0.0, min(policy.delta_bar, p_star(prefs) - m3))
    meetings = (
        _meeting(prefs, 1, 0.0, m=cash),
        _meeting(prefs, 2, 0.0, m=cash),
        _meeting(prefs, 3, 0.0, m=m3, credit_used=credit3),
    )
    bank = BankAllocation(r_tilde=0.0, l_tilde=0.0, i_d=0.0, i_l=0.0, lambda_L=0.0, n=0.0)
    return Equilibrium(
        regime=Regime.NO_BANKING,
        policy=policy,
        bank=bank,
        meetings=meetings,
        m=_aggregate(policy, meetings, "m"),
        r=0.0,
        l=0.0,
        delta_hat=cash,
    )


def scarce_deposit_rate(costs: BankCostParams, policy: PolicyPoint, rh: float) -> float:
    """Positive root of i_d^2 + (1 - c1) i_d - (c1 + kappa (1 + i)) = 0"""
    kap = policy.kappa
    c1 = policy.i_r - banking.gamma_prime(costs, rh) - (1.0 + banking.eta_prime(costs, kap * rh)) * kap
    constant = c1 + kap * (1.0 + policy.i)
    linear = 1.0 - c1
    disc = linear * linear + 4.0 * constant
    if disc < 0.0:
        raise ClassificationInconsistencyError(
            f"deposit-rate quadratic has no real root at i={policy.i!r}, i_r={policy.i_r!r}, chi={policy.chi!r}"
        )
    root = math.sqrt(disc)
    if linear > 0.0:
        return 2.0 * constant / (linear + root)
    return (root - linear) / 2.0


def solve_scarce(prefs: Preferences, costs: BankCostParams, policy: PolicyPoint) -> Equilibrium:
    """Binding lending constraint: banks sit on the scarce entry locus at r_hat"""
    chi, kap = policy.chi, policy.kappa
    rh = banking.r_hat(costs, chi)
    i_d = scarce_deposit_rate(costs, policy, rh)
    if i_d <= 0.0:
        raise ClassificationInconsistencyError(
            f"scarce deposit rate i_d={i_d!r} is not positive at i={policy.i!r}, "
            f"i_r={policy.i_r!r}, chi={chi!r}"
        )
    i_l = (1.0 + policy.i) / (1.0 + i_d) - 1.0
    lambda_L = i_l - banking.eta_prime(costs, kap * rh)
    if lambda_L < 0.0:
        if lambda_L < -MULTIPLIER_SLACK:
            raise ClassificationInconsistencyError(
                f"lending-constraint multiplier {lambda_L!r} is negative at i={policy.i!r}, "
                f"i_r={policy.i_r!r}, chi={chi!r}"
            )
        lambda_L = 0.0
    delta_hat = L_inverse(prefs, i_l)

    scale = 1.0 + i_d * chi
    meetings, _ = _banking_meetings(
        prefs, policy, i_d, delta_hat, deposit_share=chi / scale, loan_share=(1.0 - chi) / scale
    )
    _, sigma2, sigma3 = policy.sigma
    if delta_hat > policy.delta_bar:
        r = chi * ((sigma2 + sigma3) * delta_hat - sigma3 * policy.delta_bar) / scale
    else:
        r = sigma2 * chi * delta_hat / scale
    bank = BankAllocation(
        r_tilde=rh, l_tilde=kap * rh, i_d=i_d, i_l=i_l, lambda_L=lambda_L, n=r / rh
    )
    return Equilibrium(
        regime=Regime.SCARCE,
        policy=policy,
        bank=bank,
        meetings=meetings,
        m=_aggregate(policy, meetings, "m"),
        r=r,
        l=kap * r,
        delta_hat=delta_hat,
    )


def ample_pricing_residual(costs: BankCostParams, policy: PolicyPoint, r: float) -> float:
    """(1 + eta'(l(r))) (1 + i_r - gamma'(r)) - (1 + i) along the slack entry locus"""
    l = banking.entry_loan(costs, r)
    return (1.0 + banking.eta_prime(costs, l)) * (1.0 + policy.i_r - banking.gamma_prime(costs, r)) - (
        1.0 + policy.i
    )


def _ample_pricing_slope(costs: BankCostParams, policy: PolicyPoint, r: float) -> float:
    l = banking.entry_loan(costs, r)
    dl = banking.entry_loan_prime(costs, r)
    if not math.isfinite(dl):
        return math.inf
    margin = 1.0 + policy.i_r - banking.gamma_prime(costs, r)
    return 2.0 * costs.E * dl * margin - (1.0 + banking.eta_prime(costs, l)) * banking.gamma_double_prime(
        costs, r
    )


def solve_ample(prefs: Preferences, costs: BankCostParams, policy: PolicyPoint) -> Equilibrium:
    """Slack lending constraint: reserves per bank between r_hat and r_lower"""
    rh = banking.r_hat(costs, policy.chi)
    rl = banking.r_lower(costs)
    if not rh < rl:
        raise ClassificationInconsistencyError(
            f"empty reserve bracket [{rh!r}, {rl!r}] at chi={policy.chi!r}"
        )
    try:
        r_tilde = bracketed_root(
            lambda r: ample_pricing_residual(costs, policy, r),
            rh,
            rl,
            fprime=lambda r: _ample_pricing_slope(costs, policy, r),
            endpoint_tol=ENDPOINT_TOL,
        )
    except SolverError as e:
        raise ClassificationInconsistencyError(
            f"ample pricing equation has no root in [r_hat, r_lower] at i={policy.i!r}, "
            f"i_r={policy.i_r!r}, chi={policy.chi!r}: {e}"
        ) from e
    l_tilde = 0.0 if r_tilde == rl else banking.entry_loan(costs, r_tilde)
    i_d = policy.i_r - banking.gamma_prime(costs, r_tilde)
    if i_d <= 0.0:
        raise ClassificationInconsistencyError(
            f"ample deposit rate i_d={i_d!r} is not positive at i={policy.i!r}, i_r={policy.i_r!r}"
        )
    i_l = banking.eta_prime(costs, l_tilde)
    delta_hat = L_inverse(prefs, i_l)

    balance = (1.0 + i_d) * r_tilde + l_tilde
    meetings, bank_liquidity = _banking_meetings(
        prefs, policy, i_d, delta_hat, deposit_share=r_tilde / balance, loan_share=l_tilde / balance
    )
    n = bank_liquidity / balance
    bank = BankAllocation(r_tilde=r_tilde, l_tilde=l_tilde, i_d=i_d, i_l=i_l, lambda_L=0.0, n=n)
    return Equilibrium(
        regime=Regime.AMPLE,
        policy=policy,
        bank=bank,
        meetings=meetings,
        m=_aggregate(policy, meetings, "m"),
        r=n * r_tilde,
        l=n * l_tilde,
        delta_hat=delta_hat,
    )


def equilibrium_violations(
    eq: Equilibrium, prefs: Preferences, costs: BankCostParams, tol: float = DEFAULT_TOL
) -> List[str]:
    """Names of every equilibrium condition the record fails"""
    policy, bank = eq.policy, eq.bank
    kap = policy.kappa
    ps = p_star(prefs)
    failures: List[str] = []

    def check(name: str, value: float, limit: float = tol) -> None:
        if not abs(value) <= limit:
            failures.append(f"{name} residual {value!r}")

    for mt in eq.meetings:
        check(
            f"liquidity identity j={mt.j}",
            mt.z - (mt.m + (1.0 + bank.i_d) * mt.d + mt.l + mt.credit_used),
        )
        check(f"terms of trade j={mt.j}", payment(prefs, mt.q) - min(mt.z, ps), tol * max(1.0, ps))
        if mt.credit_used > policy.delta_bar + tol:
            failures.append(f"credit used {mt.credit_used!r} above limit {policy.delta_bar!r}")

    check("deposit clearing", _aggregate(policy, eq.meetings, "d") - eq.r)
    check("loan clearing", _aggregate(policy, eq.meetings, "l") - eq.l)
    check("cash clearing", _aggregate(policy, eq.meetings, "m") - eq.m)

    if eq.regime == Regime.NO_BANKING:
        if eq.r != 0.0 or eq.l != 0.0 or bank.n != 0.0:
            failures.append("no-banking equilibrium with active banks")
        return failures

    if bank.l_tilde > kap * bank.r_tilde + 1e-12:
        failures.append(f"lending constraint violated: l={bank.l_tilde!r} > {kap * bank.r_tilde!r}")
    check("complementary slackness", bank.lambda_L * (kap * bank.r_tilde - bank.l_tilde))
    reserves_foc, loans_foc = banking.bank_foc_residuals(costs, bank, policy)
    check("reserve FOC", reserves_foc)
    check("loan FOC", loans_foc)
    if bank.n > 0.0:
        check("free entry", banking.entry_profit(costs, bank, policy))

    if eq.regime == Regime.SCARCE:
        check("binding lending constraint", eq.l - kap * eq.r)
    elif eq.r > 0.0 and not eq.l < kap * eq.r:
        failures.append(f"ample lending constraint binds: l={eq.l!r}, r={eq.r!r}")
    return failures


def solve(
    prefs: Preferences, costs: BankCostParams, policy: PolicyPoint, tol: float = DEFAULT_TOL
) -> Equilibrium:
    """Classify the policy point, solve its regime and verify the result"""
    regime = classify(costs, policy)
    if regime == Regime.NO_BANKING:
        eq = solve_no_banking(prefs, policy)
    elif regime == Regime.SCARCE:
        eq = solve_scarce(prefs, costs, policy)
    else:
        eq = solve_ample(prefs, costs, policy)

    failures = equilibrium_violations(eq, prefs, costs, tol)
    if failures:
        logger.error(f"Equilibrium check failed at {policy}: {failures}")
        raise ClassificationInconsistencyError(
            f"{regime.value} solution at i={policy.i!r}, i_r={policy.i_r!r}, chi={policy.chi!r} "
            f"fails: {'; '.join(failures)}"
        )
    return eq
