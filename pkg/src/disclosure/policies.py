"""Information policies and the shirk schedules they induce.

A shirk schedule is a pair of distributions over the agent's shirk time, one
per task quality.  Each distribution is a finite mix of atoms, exponential
segments (Poisson disclosure pieces) and a mass at infinity, so every value
integral is available in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .env import HIGH, LOW, NEVER, Environment, w_shirk
from . import thresholds as th

MASS_TOL = 1e-12


class PolicyKind(str, Enum):
    KG = "KG"
    DD = "DD"
    MDD = "MDD"
    IPD = "IPD"
    DPD = "DPD"
    IFD = "IFD"
    NONE = "NONE"
    CUSTOM_CUTOFF = "CUSTOM_CUTOFF"


class ObedienceViolation(ValueError):
    """A requested policy would not be followed; `slack` is the agent's (negative) value."""

    def __init__(self, message: str, slack: float):
        super().__init__(message)
        self.slack = slack


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class ShirkDistribution:
    atoms: tuple = ()          # ((time, mass), ...)
    segments: tuple = ()       # ((start, rate, mass), ...): start + Exp(rate)
    tail: float = 0.0          # mass at infinity

    def __post_init__(self):
        atoms = tuple(sorted((float(t), float(m)) for t, m in self.atoms if m > 0))
        segs = tuple((float(a), float(k), float(m)) for a, k, m in self.segments if m > 0)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "segments", segs)
        for t, m in atoms:
            if not (0 <= t < math.inf) or m < 0:
                raise ValueError(f"bad atom ({t}, {m})")
        for a, k, m in segs:
            if not (0 <= a < math.inf) or k <= 0:
                raise ValueError(f"bad exponential segment ({a}, {k}, {m})")
        if self.tail < -MASS_TOL:
            raise ValueError("negative mass at infinity")
        total = self.total_mass()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"shirk distribution has total mass {total}, expected 1")

    @classmethod
    def never(cls) -> "ShirkDistribution":
        return cls(tail=1.0)

    @classmethod
    def at(cls, t: float) -> "ShirkDistribution":
        return cls.never() if t == NEVER else cls(atoms=((t, 1.0),))

    def total_mass(self) -> float:
        return sum(m for _, m in self.atoms) + sum(m for _, _, m in self.segments) + self.tail

    def cdf(self, s):
        """P(tau <= s), right-continuous."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for t, m in self.atoms:
            out = out + m * (s >= t)
        for a, k, m in self.segments:
            out = out - m * np.expm1(-k * np.maximum(s - a, 0.0))
        return out

    def survival(self, s):
        """P(tau > s), computed without cancellation."""
        s = np.asarray(s, dtype=float)
        out = np.full_like(s, self.tail)
        for t, m in self.atoms:
            out = out + m * (s < t)
        for a, k, m in self.segments:
            out = out + m * np.exp(-k * np.maximum(s - a, 0.0))
        return out

    def forward_discount(self, s, rho: float):
        """E[exp(-rho (tau - s)); s < tau < inf]."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for t, m in self.atoms:
            out = out + np.where(s < t, m * np.exp(-rho * np.maximum(t - s, 0.0)), 0.0)
        for a, k, m in self.segments:
            before = m * k / (k + rho) * np.exp(-rho * np.maximum(a - s, 0.0))
            after = m * k / (k + rho) * np.exp(-k * np.maximum(s - a, 0.0))
            out = out + np.where(s <= a, before, after)
        return out

    def discount(self, rho: float) -> float:
        """E[exp(-rho tau)] with exp(-inf) = 0, atoms at zero included."""
        total = sum(m * math.exp(-rho * t) for t, m in self.atoms)
        total += sum(m * k / (k + rho) * math.exp(-rho * a) for a, k, m in self.segments)
        return total

    def event_times(self) -> list:
        return [t for t, _ in self.atoms] + [a for a, _, _ in self.segments]

    def sample(self, u_pick, u_draw):
        """Inverse-transform sampling from two independent uniform arrays."""
        comps = [(m, "atom", t, 0.0) for t, m in self.atoms]
        comps += [(m, "seg", a, k) for a, k, m in self.segments]
        comps.append((self.tail, "inf", NEVER, 0.0))
        cum = np.cumsum([c[0] for c in comps])
        idx = np.minimum(np.searchsorted(cum / cum[-1], u_pick, side="right"), len(comps) - 1)
        out = np.empty_like(u_pick)
        for j, (_, kind, a, k) in enumerate(comps):
            sel = idx == j
            if kind == "seg":
                out[sel] = a - np.log1p(-u_draw[sel]) / k
            else:
                out[sel] = a
        return out

    def to_dict(self) -> dict:
        return {"atoms": [list(a) for a in self.atoms],
                "segments": [list(s) for s in self.segments],
                "tail": self.tail}


@dataclass(frozen=True)
class ShirkSchedule:
    high: ShirkDistribution
    low: ShirkDistribution

    def for_quality(self, q: str) -> ShirkDistribution:
        return self.high if q == HIGH else self.low

    def event_times(self) -> list:
        return sorted(set(self.high.event_times() + self.low.event_times()))

    def to_dict(self) -> dict:
        return {"H": self.high.to_dict(), "L": self.low.to_dict()}


@dataclass(frozen=True)
class Policy:
    kind: PolicyKind
    params: dict = field(default_factory=dict)
    cutoff: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "parameters": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "Policy":
        return cls(PolicyKind(d["kind"]), dict(d.get("parameters", {})))


def _need_pessimistic(env: Environment, name: str) -> None:
    if not env.pessimistic:
        raise PreconditionError(f"{name} needs the pessimistic case (lambda_h > lambda_l)")


def no_info_value(env: Environment, mu: float) -> float:
    """Principal's value when the agent gets no information at prior mu."""
    e = env.replace(mu=mu) if mu != env.mu else env
    t = best_response_no_info(e)
    return mu * w_shirk(e, t, HIGH) + (1 - mu) * w_shirk(e, t, LOW)


def best_response_no_info(env: Environment) -> float:
    """Shirk time of an uninformed agent."""
    if env.pessimistic:
        return th.t_bar(env)
    return NEVER if env.mu >= th.mu_bar(env) else 0.0


def kg_target(env: Environment) -> float:
    """Posterior targeted by the optimal static policy after a 'continue' signal."""
    if not env.pessimistic:
        return th.mu_bar(env)
    # tangency of the chord from the origin with the no-information value curve
    lo, hi = th.mu_hat(env), 1.0
    res = minimize_scalar(lambda m: -no_info_value(env, m) / m, bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x)


def make_none(env: Environment) -> Policy:
    return Policy(PolicyKind.NONE, {"shirk_time": best_response_no_info(env)})


def make_kg(env: Environment) -> Policy:
    target = kg_target(env)
    if env.mu >= target:
        return make_none(env)
    pass_prob = env.mu * (1 - target) / (target * (1 - env.mu))
    shirk_time = th.t_bar(env, target) if env.pessimistic else NEVER
    return Policy(PolicyKind.KG, {"beta0": 1.0 - pass_prob, "target": target,
                                  "shirk_time": shirk_time})


def make_dd(env: Environment, t: float) -> Policy:
    if t < 0:
        raise ValueError("disclosure time must be >= 0")
    limit = th.t_tilde(env)
    if t > limit:
        from .oracle.values import values
        slack = values(env, _dd_schedule(t))[1]
        raise ObedienceViolation(f"DD({t}) exceeds the maximal delay {limit}", slack)
    return Policy(PolicyKind.DD, {"t": float(t)})


def make_mdd(env: Environment) -> Policy:
    return Policy(PolicyKind.MDD, {"t": th.t_tilde(env)})


def make_ipd(env: Environment) -> Policy:
    _need_pessimistic(env, "IPD")
    if env.mu > th.mu_hat(env):
        raise PreconditionError("IPD needs mu <= mu_hat; use DPD")
    ratio = (env.r + env.lambda_h) / (env.r + env.lambda_l)
    beta0 = max(0.0, 1.0 - th.c2(env) * ratio)
    return Policy(PolicyKind.IPD, {"beta0": beta0, "rate": env.lambda_h - env.lambda_l})


def make_dpd(env: Environment) -> Policy:
    _need_pessimistic(env, "DPD")
    if env.mu <= th.mu_hat(env):
        raise PreconditionError("DPD needs mu > mu_hat; use IPD")
    return Policy(PolicyKind.DPD, {"start": th.t_bar(env), "rate": env.lambda_h - env.lambda_l})


def make_ifd(env: Environment) -> Policy:
    return Policy(PolicyKind.IFD, {})


def make_poisson(env: Environment) -> Policy:
    return make_ipd(env) if env.mu <= th.mu_hat(env) else make_dpd(env)


def optimal_policy(env: Environment) -> Policy:
    """Optimal dynamic policy: KG for a patient principal, MDD otherwise.

    In the pessimistic case the patient principal uses Poisson disclosure.
    At r_p == r the canonical choice is the static policy.
    """
    if env.pessimistic:
        return make_poisson(env) if env.r_p <= env.r else make_mdd(env)
    if env.mu >= th.mu_bar(env):
        return make_none(env)
    return make_kg(env) if env.r_p <= env.r else make_mdd(env)


def _dd_schedule(t: float) -> ShirkSchedule:
    return ShirkSchedule(ShirkDistribution.never(), ShirkDistribution.at(t))


def shirk_schedule(policy: Policy, env: Environment) -> ShirkSchedule:
    kind, p = policy.kind, policy.params
    never = ShirkDistribution.never()
    if kind in (PolicyKind.DD, PolicyKind.MDD):
        return _dd_schedule(p["t"])
    if kind == PolicyKind.IFD:
        return _dd_schedule(0.0)
    if kind == PolicyKind.NONE:
        t = p.get("shirk_time", best_response_no_info(env))
        return ShirkSchedule(ShirkDistribution.at(t), ShirkDistribution.at(t))
    if kind == PolicyKind.KG:
        t, b0 = p["shirk_time"], p["beta0"]
        if t == NEVER:
            low = ShirkDistribution(atoms=((0.0, b0),), tail=1.0 - b0)
        else:
            low = ShirkDistribution(atoms=((0.0, b0), (t, 1.0 - b0)))
        return ShirkSchedule(ShirkDistribution.at(t), low)
    if kind == PolicyKind.IPD:
        b0 = p["beta0"]
        low = ShirkDistribution(atoms=((0.0, b0),), segments=((0.0, p["rate"], 1.0 - b0),))
        return ShirkSchedule(never, low)
    if kind == PolicyKind.DPD:
        return ShirkSchedule(never, ShirkDistribution(segments=((p["start"], p["rate"], 1.0),)))
    raise PreconditionError(f"no binary-quality schedule for policy kind {kind.value}")
