"""Agent beliefs, continuation values and obedience checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import HIGH, LOW, Environment, v_complete, v_shirk
from .policies import ShirkSchedule, best_response_no_info


class UndefinedPosterior(ValueError):
    pass


def posterior_no_news(env: Environment, t, mu: float | None = None):
    """Belief that the task is high quality after t units of work without completion."""
    mu = env.mu if mu is None else mu
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    # logistic form avoids overflow of exp((lambda_h - lambda_l) t)
    z = math.log(mu) - math.log1p(-mu) - (env.lambda_h - env.lambda_l) * t
    out = 1.0 / (1.0 + np.exp(-z))
    return float(out) if out.ndim == 0 else out


def _log_weights(env: Environment, schedule: ShirkSchedule, s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        log_h = math.log(env.mu) + np.log(schedule.high.survival(s))
        log_l = (math.log1p(-env.mu) + (env.lambda_h - env.lambda_l) * s
                 + np.log(schedule.low.survival(s)))
    return s, log_h, log_l


def _posterior(log_h, log_l):
    with np.errstate(invalid="ignore"):
        top = np.maximum(log_h, log_l)
        wh = np.exp(log_h - top)
        wl = np.exp(log_l - top)
        return wh / (wh + wl)


def posterior_under_schedule(env: Environment, schedule: ShirkSchedule, s):
    """P(q = H | no completion and no shirk recommendation by time s)."""
    s, log_h, log_l = _log_weights(env, schedule, s)
    if np.any(np.isneginf(log_h) & np.isneginf(log_l)):
        raise UndefinedPosterior("no surviving path at the requested time")
    out = _posterior(log_h, log_l)
    return float(out) if out.ndim == 0 else out


def _continuation(env: Environment, schedule: ShirkSchedule, s):
    """Continuation values; NaN where no path survives."""
    s, log_h, log_l = _log_weights(env, schedule, s)
    post = _posterior(log_h, log_l)
    parts = []
    for q, dist in ((HIGH, schedule.high), (LOW, schedule.low)):
        surv = dist.survival(s)
        fwd = dist.forward_discount(s, env.r + env.rate(q))
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(surv > 0, v_complete(env, q) * (1.0 - fwd / np.where(surv > 0, surv, 1.0)), 0.0)
        parts.append(cond)
    val = np.where(post > 0, post * parts[0], 0.0) + np.where(post < 1, (1 - post) * parts[1], 0.0)
    return np.where(np.isneginf(log_h) & np.isneginf(log_l), np.nan, val)


def continuation_value(env: Environment, schedule: ShirkSchedule, s):
    """Agent's expected payoff from obeying, given work is still under way at time s."""
    out = _continuation(env, schedule, s)
    if np.any(np.isnan(out)):
        raise UndefinedPosterior("no surviving path at the requested time")
    return float(out) if out.ndim == 0 else out


def ex_ante_value(env: Environment, schedule: ShirkSchedule) -> float:
    total = 0.0
    for q, dist, p in ((HIGH, schedule.high, env.mu), (LOW, schedule.low, 1 - env.mu)):
        total += p * v_complete(env, q) * (1.0 - dist.discount(env.r + env.rate(q)))
    return total


def uninformed_value(env: Environment, tau: float) -> float:
    """Agent's value from working until tau without any information."""
    return env.mu * v_shirk(env, tau, HIGH) + (1 - env.mu) * v_shirk(env, tau, LOW)


def best_shirk_no_info(env: Environment) -> float:
    return best_response_no_info(env)


def best_shirk_grid(env: Environment, n: int = 20001) -> float:
    """Grid search for the best uninformed shirk time, used as a cross-check."""
    grid = np.concatenate([[0.0], np.linspace(0, env.t_max, n)[1:]])
    vals = np.array([uninformed_value(env, t) for t in grid])
    return float(grid[int(np.argmax(vals))])


def default_grid(env: Environment, n: int = 512) -> np.ndarray:
    """Geometric time grid on (0, T_max]."""
    return np.geomspace(env.t_max * 1e-5, env.t_max, n)


@dataclass(frozen=True)
class ObedienceReport:
    min_value: float
    argmin_time: float
    ex_ante: float
    passed: bool

    def to_dict(self) -> dict:
        return {"min_value": self.min_value, "argmin_time": self.argmin_time,
                "ex_ante": self.ex_ante, "pass": self.passed}


def obedience_grid(env: Environment, schedule: ShirkSchedule, n: int = 512) -> np.ndarray:
    pts = [0.0, *default_grid(env, n)]
    for t in schedule.event_times():
        pts.append(t)
        if t > 0:
            pts.append(float(np.nextafter(t, 0.0)))
    return np.unique(np.asarray(pts, dtype=float))


def obedience_check(env: Environment, schedule: ShirkSchedule, s_grid=None,
                    tol: float = 1e-7) -> ObedienceReport:
    """Minimum continuation value over a time grid, plus the ex-ante value."""
    if s_grid is None:
        s_grid = obedience_grid(env, schedule)
    s_grid = np.asarray(s_grid, dtype=float)
    vals = _continuation(env, schedule, s_grid)
    ex_ante = ex_ante_value(env, schedule)
    ok = ~np.isnan(vals)
    if ok.any():
        i = int(np.argmin(np.where(ok, vals, np.inf)))
        lo, at = float(vals[i]), float(s_grid[i])
    else:
        lo, at = ex_ante, 0.0
    return ObedienceReport(lo, at, ex_ante, bool(lo >= -tol and ex_ante >= -tol))
