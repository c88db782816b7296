"""Independent checks: exact values, discretized programs, concavification, Monte Carlo."""
from .values import values
from .programs import (DiscreteProgram, LPSolution, time_nodes, solve_stationary_lp,
                       two_point_oracle, solve_pessimistic_lp)
from .concavify import ValueCurve, concavify, upper_hull
from .montecarlo import MCResult, monte_carlo
from .curves import mu_sweep, MU_SWEEP_COLUMNS

__all__ = [
    "values", "DiscreteProgram", "LPSolution", "time_nodes", "solve_stationary_lp",
    "two_point_oracle", "solve_pessimistic_lp", "ValueCurve", "concavify", "upper_hull",
    "MCResult", "monte_carlo", "mu_sweep", "MU_SWEEP_COLUMNS",
]
