from __future__ import annotations

import math

import numpy as np

from reldev.deviation import DeviationCurve
from reldev.simulation import get_error_process
from reldev.smoothing import TimeSeries


def design(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / n


def series_from(func, n: int, errors: str = None, seed: int = 0, scale: float = 1.0):
    """``func(i/n)`` plus optional noise from a registered error process."""
    values = np.asarray(func(design(n)), dtype=float)
    if errors is not None:
        rng = np.random.default_rng(seed)
        values = values + scale * get_error_process(errors)(rng, n)
    return TimeSeries(values)


def brute_local_linear(values, k, h: float, t: float) -> tuple[float, float]:
    """Weighted least squares of ``X_i`` on ``(1, i/n - t)``, solved directly."""
    values = np.asarray(values, dtype=float)
    x = design(values.size)
    w = k((x - t) / h)
    keep = w > 0
    a = np.column_stack([np.ones(keep.sum()), x[keep] - t])
    root = np.sqrt(w[keep])
    coef, *_ = np.linalg.lstsq(a * root[:, None], values[keep] * root, rcond=None)
    return float(coef[0]), float(coef[1])


def brute_jackknife(values, k, h: float, t: float) -> float:
    narrow, _ = brute_local_linear(values, k, h / math.sqrt(2.0), t)
    wide, _ = brute_local_linear(values, k, h, t)
    return 2.0 * narrow - wide


def flat_deviation(level: float, n: int = 500, h: float = 0.1, points: int = 101):
    """A deviation curve equal to ``level`` everywhere on ``[h, 1 - h]``."""
    grid = np.linspace(h, 1.0 - h, points)
    return DeviationCurve.from_values(grid, np.full(points, level), bandwidth=h, n=n)
