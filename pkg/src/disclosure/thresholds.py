"""Belief and time thresholds of the binary-quality model.

All thresholds are closed forms; root finding only appears in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .env import HIGH, LOW, NEVER, Environment, v_complete


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def mu_bar(env: Environment) -> float:
    """Belief at which working forever gives the agent exactly zero."""
    vh, vl = v_complete(env, HIGH), v_complete(env, LOW)
    return -vl / (vh - vl)


def mu_hat(env: Environment) -> float:
    """Belief at which the agent is indifferent about working one more instant."""
    gain = (env.r + env.lambda_h) * v_complete(env, HIGH)
    loss = -(env.r + env.lambda_l) * v_complete(env, LOW)
    return loss / (gain + loss)


def c2(env: Environment, mu: float | None = None) -> float:
    mu = env.mu if mu is None else mu
    return mu * v_complete(env, HIGH) / ((1.0 - mu) * -v_complete(env, LOW))


def c1(env: Environment, mu: float | None = None) -> float:
    return 1.0 - c2(env, mu)


def mu_tilde(env: Environment, t: float) -> float:
    """Lowest prior for which full disclosure at t keeps the agent willing to start."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == NEVER:
        return mu_bar(env)
    loss = -math.expm1(-(env.r + env.lambda_l) * t) * -v_complete(env, LOW)
    return loss / (v_complete(env, HIGH) + loss)


def t_bar(env: Environment, mu: float | None = None) -> float:
    """Planned shirk time of an uninformed agent in the pessimistic case."""
    if not env.pessimistic:
        raise ValueError("t_bar needs lambda_h > lambda_l")
    mu = env.mu if mu is None else mu
    m_hat = mu_hat(env)
    if mu <= m_hat:
        return 0.0
    return (_logit(mu) - _logit(m_hat)) / (env.lambda_h - env.lambda_l)


def t_tilde(env: Environment, mu: float | None = None) -> float:
    """Latest disclosure time that keeps the agent obedient (NEVER if no disclosure is needed)."""
    mu = env.mu if mu is None else mu
    if env.pessimistic:
        m_hat = mu_hat(env)
        if mu > m_hat:
            return t_bar(env, mu) + t_tilde(env, m_hat)
        return -math.log1p(-c2(env, mu)) / (env.r + env.lambda_l)
    if mu >= mu_bar(env):
        return NEVER
    return -math.log(c1(env, mu)) / (env.r + env.lambda_l)


@dataclass(frozen=True)
class Thresholds:
    mu_bar: float
    mu_hat: float
    c1: float
    c2: float
    t_tilde: float
    t_bar: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@lru_cache(maxsize=1024)
def thresholds(env: Environment) -> Thresholds:
    return Thresholds(
        mu_bar=mu_bar(env),
        mu_hat=mu_hat(env),
        c1=c1(env),
        c2=c2(env),
        t_tilde=t_tilde(env),
        t_bar=t_bar(env) if env.pessimistic else None,
    )
