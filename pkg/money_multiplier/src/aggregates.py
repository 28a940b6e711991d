# src/aggregates.py
import logging
from typing import Optional

import numpy as np

from .models import (
    AggregateStats,
    BankCostParams,
    Equilibrium,
    OutputDefinition,
    Preferences,
    Regime,
    WelfareReport,
    WelfareShare,
)
from .preferences import utility

logger = logging.getLogger(__name__)


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    if denominator == 0.0:
        return None
    return numerator / denominator


def output(
    eq: Equilibrium,
    prefs: Preferences,
    definition: OutputDefinition = OutputDefinition.UTILITY_SCALE,
) -> float:
    """Model output: a CM component plus DM liquidity sum sigma_j z_j"""
    base = prefs.B if definition == OutputDefinition.UTILITY_SCALE else 1.0
    return base + sum(s * mt.z for s, mt in zip(eq.policy.sigma, eq.meetings))


def money_multiplier(eq: Equilibrium) -> float:
    """(m + r + l) / (m + r); 1 when the base is empty"""
    base = eq.m + eq.r
    if base == 0.0:
        return 1.0
    return (base + eq.l) / base


def aggregates(
    eq: Equilibrium,
    prefs: Preferences,
    costs: BankCostParams,
    definition: OutputDefinition = OutputDefinition.UTILITY_SCALE,
) -> AggregateStats:
    """Observable ratios of a solved equilibrium

    Deposits are measured as r + l, the checkable liabilities of banks.
    """
    policy = eq.policy
    sigma = policy.sigma
    deposits = eq.r + eq.l
    y = output(eq, prefs, definition)

    if eq.regime == Regime.SCARCE:
        # Every unit of reserves backs deposits when lending binds
        required, excess = eq.r, 0.0
    else:
        required = policy.chi * deposits
        excess = eq.r - required

    credit3 = eq.meeting(3).credit_used
    dm_volume = sum(s * mt.p for s, mt in zip(sigma, eq.meetings))

    traded = [(s, mt) for s, mt in zip(sigma, eq.meetings) if mt.q > 0.0 and s > 0.0]
    weight = sum(s for s, _ in traded)
    markup = sum(s * mt.p / mt.q for s, mt in traded) / weight if weight > 0.0 else None

    bank_income = eq.bank.n * costs.k
    return AggregateStats(
        m0=eq.m + eq.r,
        m1=eq.m + deposits,
        zeta=money_multiplier(eq),
        cd_ratio=_ratio(eq.m, deposits),
        required=required,
        excess=excess,
        excess_ratio=_ratio(excess, deposits),
        y=y,
        c_over_y=eq.m / y,
        r_over_y=eq.r / y,
        uc_over_y=sigma[2] * credit3 / y,
        uc_over_dm=_ratio(sigma[2] * credit3, dm_volume),
        markup=markup,
        pi_over_y=bank_income / y,
        pi_over_d=_ratio(bank_income, deposits),
    )


def welfare(
    eq: Equilibrium,
    prefs: Preferences,
    share: WelfareShare = WelfareShare.PRINTED,
) -> WelfareReport:
    """Buyer and seller welfare per meeting type

    Buyers pay i on cash and i - i_d on deposits and keep a share of the DM
    surplus u(q) - q; sellers keep (1 - theta) of it.
    """
    policy = eq.policy
    buyer_share = 1.0 - prefs.theta if share == WelfareShare.PRINTED else prefs.theta
    seller_share = 1.0 - prefs.theta
    jb, js = [], []
    for mt in eq.meetings:
        surplus = utility(prefs, mt.q) - mt.q
        holding_cost = policy.i * mt.m + (policy.i - eq.bank.i_d) * mt.d
        jb.append(buyer_share * surplus - holding_cost)
        js.append(seller_share * surplus)
    total = sum(s * (b + v) for s, b, v in zip(policy.sigma, jb, js))
    return WelfareReport(
        jb=tuple(jb),
        js=tuple(js),
        total=total,
        dispersion=float(np.std(jb + js)),
    )
