"""Principal value curves over the prior."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..env import HIGH, Environment, w_complete
from ..policies import (make_kg, make_mdd, make_poisson, no_info_value, shirk_schedule)
from .values import values
from .concavify import ValueCurve, concavify

MU_SWEEP_COLUMNS = ("mu", "W_KG", "W_MDD", "W_IPD_or_DPD", "W_noinfo", "W_concavified")


def _row(env: Environment, mu: float) -> tuple:
    e = env.replace(mu=mu)
    w_kg = values(e, shirk_schedule(make_kg(e), e))[0]
    w_mdd = values(e, shirk_schedule(make_mdd(e), e))[0]
    w_pd = values(e, shirk_schedule(make_poisson(e), e))[0] if e.pessimistic else math.nan
    return (mu, w_kg, w_mdd, w_pd, no_info_value(e, mu))


def mu_sweep(env: Environment, mus, workers: int = 4) -> list[tuple]:
    """Rows of MU_SWEEP_COLUMNS; the concavified column uses the whole grid."""
    mus = np.asarray(mus, dtype=float)
    if mus.size == 0:
        raise ValueError("empty mu grid")
    if np.any((mus <= 0) | (mus >= 1)) or np.any(np.diff(mus) <= 0):
        raise ValueError("mu grid must be strictly increasing inside (0, 1)")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda m: _row(env, float(m)), mus))
    # anchor the hull at the no-persuasion endpoints mu = 0 and mu = 1
    x = np.concatenate([[0.0], mus, [1.0]])
    y = np.concatenate([[0.0], [r[4] for r in rows], [no_info_value_at_one(env)]])
    hull = concavify(ValueCurve(x, y, "W_noinfo")).y[1:-1]
    return [r + (float(h),) for r, h in zip(rows, hull)]


def no_info_value_at_one(env: Environment) -> float:
    # a certain high-quality task is always completed
    return w_complete(env, HIGH)
