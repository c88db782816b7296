from __future__ import annotations

from ..env import HIGH, LOW, Environment, v_complete, w_complete
from ..policies import ShirkSchedule


def values(env: Environment, schedule: ShirkSchedule) -> tuple[float, float]:
    """Principal value W and agent value V of a shirk schedule, integrated exactly."""
    W = V = 0.0
    for q, dist, p in ((HIGH, schedule.high, env.mu), (LOW, schedule.low, 1 - env.mu)):
        lam = env.rate(q)
        W += p * w_complete(env, q) * (1.0 - dist.discount(env.r_p + lam))
        V += p * v_complete(env, q) * (1.0 - dist.discount(env.r + lam))
    return W, V
