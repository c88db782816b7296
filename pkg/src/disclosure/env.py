"""Model primitives and closed-form payoffs of the effort/disclosure model."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

# Shirk time meaning "never shirk". Every evaluator branches on it explicitly.
NEVER = math.inf

HIGH = "H"
LOW = "L"
QUALITIES = (HIGH, LOW)

CONFIG_KEYS = ("mu", "r", "r_p", "lambda_h", "lambda_l", "c", "H", "L", "b_h", "b_l")
REQUIRED_KEYS = CONFIG_KEYS[:8]


class InvalidEnvironment(ValueError):
    pass


@dataclass(frozen=True)
class Environment:
    mu: float
    r: float
    r_p: float
    lambda_h: float
    lambda_l: float
    c: float
    H: float
    L: float
    b_h: float | None = None
    b_l: float | None = None

    def __post_init__(self):
        # bonuses default to b(q) = q
        if self.b_h is None:
            object.__setattr__(self, "b_h", float(self.H))
        if self.b_l is None:
            object.__setattr__(self, "b_l", float(self.L))
        for name in CONFIG_KEYS:
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or isinstance(val, bool) or not math.isfinite(val):
                raise InvalidEnvironment(f"{name} must be a finite real, got {val!r}")
            object.__setattr__(self, name, float(val))
        if not 0.0 < self.mu < 1.0:
            raise InvalidEnvironment(f"mu must lie in (0,1), got {self.mu}")
        for name in ("r", "r_p", "lambda_h", "lambda_l", "c"):
            if getattr(self, name) <= 0:
                raise InvalidEnvironment(f"{name} must be positive")
        if not self.H > self.L > 0:
            raise InvalidEnvironment("qualities must satisfy H > L > 0")
        if self.b_h < 0 or self.b_l < 0:
            raise InvalidEnvironment("bonuses must be non-negative")
        if not v_complete(self, HIGH) > 0:
            raise InvalidEnvironment("need v(H) > 0")
        if not v_complete(self, LOW) < 0:
            raise InvalidEnvironment("need v(L) < 0")

    @property
    def stationary(self) -> bool:
        return self.lambda_h == self.lambda_l

    @property
    def pessimistic(self) -> bool:
        return self.lambda_h > self.lambda_l

    @property
    def optimistic(self) -> bool:
        return self.lambda_h < self.lambda_l

    @property
    def t_max(self) -> float:
        """Upper end of every time bracket; discount factors beyond it are negligible."""
        return 100.0 / (self.r + min(self.lambda_h, self.lambda_l))

    def rate(self, q: str) -> float:
        return self.lambda_h if _tag(q) == HIGH else self.lambda_l

    def quality(self, q: str) -> float:
        return self.H if _tag(q) == HIGH else self.L

    def bonus(self, q: str) -> float:
        return self.b_h if _tag(q) == HIGH else self.b_l

    def replace(self, **changes) -> "Environment":
        d = self.to_dict()
        d.update(changes)
        return Environment(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Environment":
        if not isinstance(d, dict):
            raise InvalidEnvironment("environment must be a JSON object")
        unknown = set(d) - set(CONFIG_KEYS)
        if unknown:
            raise InvalidEnvironment(f"unknown environment keys: {sorted(unknown)}")
        missing = [k for k in REQUIRED_KEYS if k not in d]
        if missing:
            raise InvalidEnvironment(f"missing environment keys: {missing}")
        return cls(**d)


def _tag(q: str) -> str:
    if q not in QUALITIES:
        raise ValueError(f"quality tag must be 'H' or 'L', got {q!r}")
    return q


def _check_tau(tau: float) -> None:
    if math.isnan(tau) or tau < 0:
        raise ValueError(f"shirk time must be >= 0, got {tau}")


def v_complete(env: Environment, q: str) -> float:
    """Agent's expected payoff from working on a quality-q task until completion."""
    lam = env.rate(q)
    return (lam * env.quality(q) - env.c) / (env.r + lam)


def w_complete(env: Environment, q: str) -> float:
    lam = env.rate(q)
    return lam * env.bonus(q) / (env.r_p + lam)


def v_shirk(env: Environment, tau: float, q: str) -> float:
    """Agent's payoff when planning to shirk at tau (NEVER means work to completion)."""
    _check_tau(tau)
    if tau == NEVER:
        return v_complete(env, q)
    return -math.expm1(-(env.r + env.rate(q)) * tau) * v_complete(env, q)


def w_shirk(env: Environment, tau: float, q: str) -> float:
    _check_tau(tau)
    if tau == NEVER:
        return w_complete(env, q)
    return -math.expm1(-(env.r_p + env.rate(q)) * tau) * w_complete(env, q)
