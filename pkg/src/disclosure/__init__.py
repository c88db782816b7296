"""Optimal dynamic disclosure to a working agent, with independent numerical checks."""
from .env import Environment, InvalidEnvironment, NEVER, HIGH, LOW
from .thresholds import Thresholds
from .policies import (Policy, PolicyKind, ShirkDistribution, ShirkSchedule, ObedienceViolation,
                       optimal_policy, shirk_schedule)
from .agent import continuation_value, obedience_check

__version__ = "0.1.0"

__all__ = [
    "Environment", "InvalidEnvironment", "NEVER", "HIGH", "LOW", "Thresholds",
    "Policy", "PolicyKind", "ShirkDistribution", "ShirkSchedule", "ObedienceViolation",
    "optimal_policy", "shirk_schedule", "continuation_value", "obedience_check",
]
