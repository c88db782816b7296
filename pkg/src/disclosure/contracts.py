"""Contracts that combine a disclosure policy with wages and an upfront payment.

Stationary environments only (lambda_h == lambda_l).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .env import HIGH, LOW, NEVER, Environment, v_complete, w_complete
from .policies import Policy, make_ifd, make_kg, make_mdd, shirk_schedule
from .oracle.values import values
from .oracle.programs import time_nodes, stationary_program
from .oracle.simplex import linprog, InfeasibleError
from . import thresholds as th

MAX_BREAKPOINTS = 64


class ContractAssumptionError(ValueError):
    pass


@dataclass(frozen=True)
class Wage:
    """Piecewise-constant wage: level[i] paid on [times[i], times[i+1]), last level forever."""
    times: tuple = ()
    levels: tuple = ()

    def __post_init__(self):
        if len(self.times) != len(self.levels):
            raise ValueError("wage needs one level per breakpoint")
        if len(self.times) > MAX_BREAKPOINTS:
            raise ValueError(f"at most {MAX_BREAKPOINTS} wage breakpoints")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("wage breakpoints must increase")
        if self.times and self.times[0] < 0:
            raise ValueError("wage breakpoints must be >= 0")

    @classmethod
    def zero(cls) -> "Wage":
        return cls()

    @classmethod
    def threshold(cls, T: float, B: float) -> "Wage":
        return cls() if T == NEVER else cls((float(T),), (float(B),))

    def present_value(self, rho: float) -> float:
        """Integral of exp(-rho t) times the wage."""
        total = 0.0
        ends = list(self.times[1:]) + [NEVER]
        for t0, t1, p in zip(self.times, ends, self.levels):
            tail = 0.0 if t1 == NEVER else math.exp(-rho * t1)
            total += p * (math.exp(-rho * t0) - tail) / rho
        return total

    def to_list(self) -> list:
        return [[t, p] for t, p in zip(self.times, self.levels)]


@dataclass(frozen=True)
class Contract:
    policy: Policy
    wage: Wage
    M: float
    B: float
    v_bar: float
    margin: float | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {"policy": self.policy.to_dict(), "wage_breakpoints": self.wage.to_list(),
               "M": self.M, "B": self.B, "v_bar": self.v_bar}
        if self.margin is not None:
            out["verification_margin"] = self.margin
        return out


def _require_stationary(env: Environment) -> None:
    if not env.stationary:
        raise ContractAssumptionError("contracts are only defined for lambda_h == lambda_l")


def check_assumptions(env: Environment, v_bar: float, B: float) -> None:
    _require_stationary(env)
    if B <= 0:
        raise ContractAssumptionError("budget B must be positive")
    vh = v_complete(env, HIGH)
    if not v_bar > env.mu * vh:
        raise ContractAssumptionError("outside option must exceed mu*v(H)")
    if not v_bar < env.mu * (vh + w_complete(env, HIGH)):
        raise ContractAssumptionError("outside option must be below mu*(v(H)+w(H))")
    if not v_bar < B / (env.r + env.lambda_l):
        raise ContractAssumptionError("outside option must be below B/(r+lambda)")


def _check_contract(env: Environment, c: Contract) -> None:
    if c.M < 0:
        raise ContractAssumptionError("upfront payment must be >= 0")
    if any(p < 0 or p > c.B for p in c.wage.levels):
        raise ContractAssumptionError("wages must lie in [0, B]")


def contract_values(env: Environment, contract: Contract) -> tuple[float, float]:
    """(W, V) of a contract; wages stop once the task is done, hence rates r+lambda and r_p+lambda."""
    _require_stationary(env)
    _check_contract(env, contract)
    W, V = values(env, shirk_schedule(contract.policy, env))
    lam = env.lambda_l
    agent_pv = contract.wage.present_value(env.r + lam)
    principal_pv = contract.wage.present_value(env.r_p + lam)
    return W - principal_pv - contract.M, V + agent_pv + contract.M


def optimal_payment_timing(env: Environment, pv: float, B: float) -> tuple[Wage, float]:
    """Cheapest way for the principal to deliver agent present value pv."""
    _require_stationary(env)
    if pv < 0:
        raise ValueError("present value must be >= 0")
    k = env.r + env.lambda_l
    if env.r_p <= env.r:
        return Wage.zero(), pv
    if pv > B / k:
        raise ContractAssumptionError("present value exceeds B/(r+lambda); wages alone cannot deliver it")
    if pv == 0:
        return Wage.zero(), 0.0
    T = max(math.log(B / (k * pv)) / k, 0.0)
    return Wage.threshold(T, B), 0.0


def optimal_contract(env: Environment, v_bar: float, B: float, grid: int = 512) -> Contract:
    check_assumptions(env, v_bar, B)
    if env.r_p <= env.r:
        if w_complete(env, LOW) + v_complete(env, LOW) < 0:
            policy = make_ifd(env)
        else:
            policy = make_kg(env)
        # top up whatever the policy leaves the agent short of the outside option
        agent = values(env, shirk_schedule(policy, env))[1]
        return Contract(policy, Wage.zero(), v_bar - agent, B, v_bar)
    if env.mu >= th.mu_bar(env):
        raise ContractAssumptionError("the delayed-disclosure contract needs mu < mu_bar")
    wage, M = optimal_payment_timing(env, v_bar, B)
    closed = mdd_contract_objective(env, v_bar, B)
    margin = contract_lp_oracle(env, v_bar, B, grid) - closed
    return Contract(make_mdd(env), wage, M, B, v_bar, margin)


def _theta(env: Environment) -> float:
    return (env.r_p + env.lambda_l) / (env.r + env.lambda_l)


def _wage_weight(env: Environment, B: float) -> float:
    lam = env.lambda_l
    return B / ((1 - env.mu) * (env.r_p + lam) * w_complete(env, LOW))


def mdd_contract_objective(env: Environment, v_bar: float, B: float) -> float:
    """Normalized principal loss of MDD with the threshold wage that delivers v_bar.

    The wage term is B * exp(-(r_p+lam) T*) / ((1-mu)(r_p+lam) w(L)) with
    exp(-(r+lam) T*) = (r+lam) v_bar / B, so it decays like B**(1 - theta).
    """
    theta = _theta(env)
    k = env.r + env.lambda_l
    return th.c1(env) ** theta + _wage_weight(env, B) * (k * v_bar / B) ** theta


def _lp_at(env, v_bar, B, T, times, cost, credit, ones):
    k = env.r + env.lambda_l
    wage_pv = 0.0 if T == NEVER else B / k * math.exp(-k * T)
    rhs = th.c1(env) + max(v_bar - wage_pv, 0.0) / ((1 - env.mu) * -v_complete(env, LOW))
    if rhs > 1.0 + 1e-12:
        return math.inf
    try:
        res = linprog(cost, -credit[None, :], np.array([-rhs]), ones, np.array([1.0]))
    except InfeasibleError:
        return math.inf
    extra = 0.0 if T == NEVER else _wage_weight(env, B) * math.exp(-(env.r_p + env.lambda_l) * T)
    return res.fun + extra


def contract_lp_oracle(env: Environment, v_bar: float, B: float, grid: int = 512,
                       T_fixed: float | None = None) -> float:
    """Joint minimization over the wage start T (scan + refine) and the shirk distribution (LP)."""
    _require_stationary(env)
    if env.r_p <= env.r and T_fixed is None:
        raise ValueError("the wage-timing oracle covers r_p > r")
    times = time_nodes(env, grid)
    prog = stationary_program(env, times)
    cost, credit = prog.objective, -prog.A_ub[0]
    ones = np.ones((1, times.size))

    def f(T):
        return _lp_at(env, v_bar, B, T, times, cost, credit, ones)
    if T_fixed is not None:
        return f(T_fixed)
    Ts = np.concatenate([[0.0], np.geomspace(env.t_max * 1e-5, env.t_max, 128)])
    vals = np.array([f(T) for T in Ts])
    i = int(np.argmin(vals))
    a, b = Ts[max(i - 1, 0)], Ts[min(i + 1, len(Ts) - 1)]
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    return float(min(res.fun, vals[i]))
