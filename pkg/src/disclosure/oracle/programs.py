"""Time-grid linear programs over the low-quality shirk-time distribution."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import NEVER, Environment
from .. import thresholds as th
from .simplex import linprog


@dataclass
class DiscreteProgram:
    times: np.ndarray          # node times, starting with 0 and ending with NEVER
    objective: np.ndarray      # discount weights per node
    A_ub: np.ndarray
    b_ub: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time nodes must be strictly increasing")


@dataclass
class LPSolution:
    times: np.ndarray
    masses: np.ndarray
    objective: float

    def mass_before(self, t: float) -> float:
        return float(self.masses[self.times < t].sum())


def time_nodes(env: Environment, n: int = 512) -> np.ndarray:
    """0, n geometric points on (0, T_max], and the never-shirk node."""
    inner = np.geomspace(env.t_max * 1e-5, env.t_max, n)
    return np.concatenate([[0.0], inner, [NEVER]])


def _discount(times: np.ndarray, rho: float) -> np.ndarray:
    out = np.zeros_like(times)
    fin = np.isfinite(times)
    out[fin] = np.exp(-rho * times[fin])
    return out


def stationary_program(env: Environment, times: np.ndarray) -> DiscreteProgram:
    lam = env.lambda_l
    cost = _discount(times, env.r_p + lam)
    credit = _discount(times, env.r + lam)
    return DiscreteProgram(times, cost, -credit[None, :], np.array([-th.c1(env)]))


def solve_stationary_lp(env: Environment, times: np.ndarray | None = None) -> LPSolution:
    """Cheapest low-quality shirk distribution that keeps the agent willing to start."""
    if env.mu >= th.mu_bar(env):
        raise ValueError("no persuasion needed for mu >= mu_bar")
    times = time_nodes(env) if times is None else times
    prog = stationary_program(env, times)
    ones = np.ones((1, times.size))
    res = linprog(prog.objective, prog.A_ub, prog.b_ub, ones, np.array([1.0]))
    return LPSolution(times, res.x, res.fun)


def two_point_oracle(env: Environment, times: np.ndarray | None = None) -> LPSolution:
    """Exhaustive search over all one- and two-node supports of the stationary program."""
    times = time_nodes(env) if times is None else times
    prog = stationary_program(env, times)
    f = prog.objective
    g = -prog.A_ub[0]
    target = th.c1(env)
    best, best_x = np.inf, None
    single = np.flatnonzero(g >= target)
    if single.size:
        i = single[np.argmin(f[single])]
        best, best_x = f[i], {int(i): 1.0}
    hi = np.flatnonzero(g > target)
    lo = np.flatnonzero(g < target)
    if hi.size and lo.size:
        gh, gl = g[hi][:, None], g[lo][None, :]
        p = (target - gl) / (gh - gl)
        obj = p * f[hi][:, None] + (1 - p) * f[lo][None, :]
        k = np.unravel_index(np.argmin(obj), obj.shape)
        if obj[k] < best:
            i, j = int(hi[k[0]]), int(lo[k[1]])
            best, best_x = float(obj[k]), {i: float(p[k]), j: float(1 - p[k])}
    x = np.zeros(times.size)
    for i, w in best_x.items():
        x[i] = w
    return LPSolution(times, x, float(best))


def pessimistic_program(env: Environment, times: np.ndarray, s_grid: np.ndarray) -> DiscreteProgram:
    rl = env.r + env.lambda_l
    cost = _discount(times, env.r_p + env.lambda_l)
    # row s, scaled by exp((r + lambda_l) s): sum_{t > s} (1 - e^{-(r+lambda_l)(t-s)}) x_t
    dt = times[None, :] - s_grid[:, None]
    with np.errstate(invalid="ignore"):
        coef = np.where(dt > 0, -np.expm1(-rl * np.where(dt > 0, dt, 0.0)), 0.0)
    coef[:, ~np.isfinite(times)] = 1.0
    rhs = th.c2(env) * np.exp(-(env.lambda_h - env.lambda_l) * s_grid)
    return DiscreteProgram(times, cost, coef, rhs)


def solve_pessimistic_lp(env: Environment, times: np.ndarray | None = None,
                         s_grid: np.ndarray | None = None) -> LPSolution:
    """Cheapest low-quality shirk distribution satisfying every interim obedience constraint."""
    if not env.pessimistic:
        raise ValueError("pessimistic program needs lambda_h > lambda_l")
    times = time_nodes(env) if times is None else times
    if s_grid is None:
        s_grid = times[np.isfinite(times)]
    prog = pessimistic_program(env, times, np.asarray(s_grid, dtype=float))
    ones = np.ones((1, times.size))
    res = linprog(prog.objective, prog.A_ub, prog.b_ub, ones, np.array([1.0]))
    return LPSolution(times, res.x, res.fun)
