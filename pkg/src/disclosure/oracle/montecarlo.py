"""Monte Carlo simulation of an obedient agent under a disclosure policy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import Environment
from ..policies import Policy, shirk_schedule
from ..agent import obedience_check

BATCH = 250_000


@dataclass(frozen=True)
class MCResult:
    W: float
    W_se: float
    V: float
    V_se: float
    violations: int
    n: int
    seed: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def make_rng(seed: int) -> np.random.Generator:
    # Philox is a 64-bit counter-based generator
    return np.random.Generator(np.random.Philox(seed))


def simulate_paths(env: Environment, schedule, n: int, rng: np.random.Generator):
    """Per-path principal and agent payoffs plus the (quality, completion, shirk) draws."""
    high = rng.random(n) < env.mu
    lam = np.where(high, env.lambda_h, env.lambda_l)
    x = rng.exponential(1.0, n) / lam
    tau = np.empty(n)
    u1, u2 = rng.random(n), rng.random(n)
    tau[high] = schedule.high.sample(u1[high], u2[high])
    tau[~high] = schedule.low.sample(u1[~high], u2[~high])
    done = x <= tau
    q = np.where(high, env.H, env.L)
    b = np.where(high, env.b_h, env.b_l)
    stop = np.minimum(x, tau)
    effort_cost = -(env.c / env.r) * np.expm1(-env.r * stop)
    agent = np.where(done, np.exp(-env.r * x) * q, 0.0) - effort_cost
    principal = np.where(done, np.exp(-env.r_p * x) * b, 0.0)
    return principal, agent, high, x, tau


def monte_carlo(env: Environment, policy: Policy, n: int, seed: int, tol: float = 1e-7) -> MCResult:
    """Sample means and standard errors of both players' discounted payoffs.

    `violations` counts simulated paths still active at the time where the
    agent's continuation value is most negative (zero for obedient policies).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    schedule = shirk_schedule(policy, env)
    report = obedience_check(env, schedule, tol=tol)
    rng = make_rng(seed)
    sw = sw2 = sv = sv2 = 0.0
    violations = 0
    done = 0
    while done < n:
        k = min(BATCH, n - done)
        w, v, _, x, tau = simulate_paths(env, schedule, k, rng)
        sw += w.sum()
        sw2 += (w * w).sum()
        sv += v.sum()
        sv2 += (v * v).sum()
        if not report.passed:
            s = report.argmin_time
            violations += int(np.count_nonzero((x > s) & (tau > s)))
        done += k
    mw, mv = sw / n, sv / n
    se_w = np.sqrt(max(sw2 / n - mw * mw, 0.0) / n)
    se_v = np.sqrt(max(sv2 / n - mv * mv, 0.0) / n)
    return MCResult(float(mw), float(se_w), float(mv), float(se_v), violations, n, seed)
