import math

import numpy as np
import pytest

from money_multiplier.src.errors import DomainError
from money_multiplier.src.models import Preferences
from money_multiplier.src.preferences import (
    L,
    L_inverse,
    liquidity_premium,
    liquidity_premium_bound,
    p_star,
    payment,
    payment_inverse,
    payment_prime,
    q_star,
    trade,
)


def test_efficient_quantity(prefs):
    assert q_star(prefs) == pytest.approx(0.825 ** (1.0 / 0.398), rel=1e-15)
    assert q_star(prefs) == pytest.approx(0.6167, rel=1e-3)
    assert p_star(prefs) == pytest.approx(payment(prefs, q_star(prefs)), rel=1e-15)


def test_payment_inverse_recovers_quantity(prefs):
    for q in (1e-6, 0.01, 0.2, 0.5, 0.6):
        assert payment_inverse(prefs, payment(prefs, q)) == pytest.approx(q, rel=1e-10)


def test_trade_saturates_at_efficient_quantity(prefs):
    ps = p_star(prefs)
    above = trade(prefs, 2.0 * ps)
    assert above.q == q_star(prefs)
    assert above.p == ps
    below = trade(prefs, 0.5 * ps)
    assert below.p == 0.5 * ps
    assert payment(prefs, below.q) == pytest.approx(0.5 * ps, rel=1e-12)
    assert trade(prefs, 0.0).q == 0.0


def test_trade_rejects_negative_liquidity(prefs):
    with pytest.raises(DomainError):
        trade(prefs, -0.1)


def test_quantity_above_efficient_is_a_domain_error(prefs):
    with pytest.raises(DomainError, match="q\\*"):
        payment(prefs, 1.01 * q_star(prefs))


def test_liquidity_premium_vanishes_at_satiation(prefs):
    assert liquidity_premium(prefs, q_star(prefs)) == 0.0
    assert L(prefs, p_star(prefs)) == 0.0


def test_liquidity_premium_is_bounded(prefs):
    bound = liquidity_premium_bound(prefs)
    assert bound == pytest.approx(0.454 / 0.546)
    assert liquidity_premium(prefs, 1e-12 * q_star(prefs)) < bound


@pytest.mark.parametrize("i", [0.001, 0.01, 0.05, 0.1, 0.3])
def test_L_inverse_inverts_L(prefs, i):
    z = L_inverse(prefs, i)
    assert 0.0 < z < p_star(prefs)
    assert L(prefs, z) == pytest.approx(i, rel=1e-8)


def test_L_inverse_limits(prefs):
    assert L_inverse(prefs, 0.0) == p_star(prefs)
    assert L_inverse(prefs, liquidity_premium_bound(prefs)) == 0.0
    assert L_inverse(prefs, 5.0) == 0.0
    with pytest.raises(DomainError):
        L_inverse(prefs, -0.01)


def test_money_demand_falls_with_the_rate(prefs):
    demand = [L_inverse(prefs, i) for i in (0.0, 0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(a > b for a, b in zip(demand, demand[1:]))


def test_full_buyer_power_pays_cost():
    prefs = Preferences(B=0.825, b=0.398, theta=1.0)
    assert payment(prefs, 0.3) == 0.3
    assert payment_inverse(prefs, 0.3) == 0.3
    assert math.isinf(liquidity_premium_bound(prefs))


def test_liquidity_premium_falls_along_a_fine_grid(prefs):
    grid = q_star(prefs) * np.linspace(1e-3, 1.0, 1000)
    premia = [liquidity_premium(prefs, q) for q in grid]
    assert premia[-1] == 0.0
    assert all(a > b for a, b in zip(premia, premia[1:]))


@pytest.mark.parametrize("q", [0.05, 0.3, 0.55])
def test_payment_slope_matches_finite_difference(prefs, q):
    h = 1e-6
    slope = (payment(prefs, q + h) - payment(prefs, q - h)) / (2.0 * h)
    assert payment_prime(prefs, q) == pytest.approx(slope, rel=1e-6)


@pytest.mark.parametrize("i", [0.002, 0.02, 0.08])
def test_L_inverse_matches_a_dense_grid(prefs, i):
    theta = prefs.theta
    q = q_star(prefs) * np.linspace(1e-4, 1.0, 1_000_001)
    x = prefs.B * q ** (-prefs.b)
    premia = theta * (x - 1.0) / ((1.0 - theta) * x + theta)
    crossing = float(np.interp(i, premia[::-1], q[::-1]))
    assert L_inverse(prefs, i) == pytest.approx(payment(prefs, crossing), rel=1e-8)


def test_payment_endpoints(prefs):
    assert payment(prefs, 0.0) == 0.0
    qs = q_star(prefs)
    closed_form = 0.546 * 0.825 * qs ** 0.602 / 0.602 + 0.454 * qs
    assert payment(prefs, qs) == p_star(prefs)
    assert p_star(prefs) == pytest.approx(closed_form, rel=1e-12)
    assert p_star(prefs) == pytest.approx(0.839, rel=1e-3)


def test_negative_quantity_is_a_domain_error(prefs):
    with pytest.raises(DomainError, match="outside"):
        payment(prefs, -0.01)
