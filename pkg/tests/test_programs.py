import math
import time

import numpy as np
import pytest
from hypothesis import given, settings

from disclosure import thresholds as th
from disclosure.env import LOW
from disclosure.oracle import (solve_pessimistic_lp, solve_stationary_lp, time_nodes,
                               two_point_oracle)
from disclosure.policies import optimal_policy, shirk_schedule
from conftest import environments, env_a, env_b

EXACT_A = 0.5 ** (1.2 / 1.1)


def test_time_nodes(set_a):
    t = time_nodes(set_a, 512)
    assert t.size == 514 and t[0] == 0.0 and math.isinf(t[-1])
    assert t[-2] == pytest.approx(100 / 1.1)


def test_stationary_lp_values(set_a):
    assert EXACT_A == pytest.approx(0.4694654553, abs=1e-10)
    lp = solve_stationary_lp(set_a, time_nodes(set_a, 512))
    assert lp.objective == pytest.approx(0.4694667186, abs=1e-9)
    assert solve_stationary_lp(env_a(r_p=0.05)).objective == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(ValueError):
        solve_stationary_lp(env_a(mu=0.5))


def test_stationary_lp_one_sided_and_convergent(set_a):
    ns = np.array([64, 128, 256, 512, 1024, 2048])
    gaps = np.array([solve_stationary_lp(set_a, time_nodes(set_a, n)).objective - EXACT_A for n in ns])
    assert np.all(gaps >= -1e-12)
    slope = np.polyfit(np.log(ns), np.log(gaps), 1)[0]
    assert slope <= -1.0


@settings(max_examples=30, deadline=None)
@given(environments())
def test_lp_above_closed_form(env):
    e = env.replace(mu=0.5 * th.mu_bar(env))
    closed = shirk_schedule(optimal_policy(e), e).low.discount(e.r_p + e.lambda_l)
    assert solve_stationary_lp(e, time_nodes(e, 256)).objective >= closed - 1e-10


@pytest.mark.parametrize("mu,rp,expected", [
    (0.1, 0.05, 0.6585362),   # IPD: 1/3 + (2/3)/2.05
    (0.1, 0.2, 0.625869),     # MDD: (1 - C2)^(1.2/1.1)
    (0.5, 0.05, 0.0743226),   # DPD: 6^(-1.05)/2.05
    (0.5, 0.2, 0.0518373),    # MDD after the uninformed stopping time
])
def test_pessimistic_lp_values(mu, rp, expected):
    e = env_b(mu=mu, r_p=rp)
    lp = solve_pessimistic_lp(e)
    assert lp.objective == pytest.approx(expected, abs=2e-6)
    closed = shirk_schedule(optimal_policy(e), e).low.discount(rp + 1.0)
    assert abs(lp.objective - closed) < 1e-3
    if mu > th.mu_hat(e):
        assert lp.mass_before(th.t_bar(e)) < 1e-6


def test_pessimistic_closed_forms():
    assert 1 / 3 + (2 / 3) / 2.05 == pytest.approx(0.6585366, abs=1e-7)
    d = env_b(mu=0.5, r_p=0.05)
    assert shirk_schedule(optimal_policy(d), d).low.discount(1.05) == pytest.approx(6 ** -1.05 / 2.05)
    e = env_b(mu=0.5)
    tt = th.t_tilde(e)
    assert shirk_schedule(optimal_policy(e), e).low.discount(1.2) == pytest.approx(math.exp(-1.2 * tt))


@settings(max_examples=25, deadline=None)
@given(environments())
def test_two_point_oracle_matches_simplex(env):
    e = env.replace(mu=0.6 * th.mu_bar(env))
    t = time_nodes(e, 128)
    assert two_point_oracle(e, t).objective == pytest.approx(solve_stationary_lp(e, t).objective, abs=1e-6)
