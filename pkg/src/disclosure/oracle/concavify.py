from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ValueCurve:
    x: np.ndarray
    y: np.ndarray
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def upper_hull(x: np.ndarray, y: np.ndarray) -> list[int]:
    """Indices of the upper convex hull vertices (monotone chain), left to right."""
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def concavify(curve: ValueCurve) -> ValueCurve:
    """Smallest concave function above the sampled curve, evaluated at the same x."""
    if len(curve.x) < 2:
        raise ValueError("need at least two samples")
    idx = upper_hull(curve.x, curve.y)
    y = np.interp(curve.x, curve.x[idx], curve.y[idx])
    return ValueCurve(curve.x, np.maximum(y, curve.y), curve.label + " (concavified)")
