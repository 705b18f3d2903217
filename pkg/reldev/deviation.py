# Deviation curve, scaling sequences and the extremal set estimator
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""The estimated deviation ``d_hat(t) = mu_tilde(t) - g_hat`` and its extremal set.

Every set in this module is discretized on the grid of the deviation
curve: a set is the collection of grid points satisfying its condition,
reported as maximal runs of consecutive grid points.  Lengths are measured
by extending each run by half a grid cell on both sides, clipped to the
analysis interval.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from typing import Optional

import numpy as np

from .smoothing import SmoothCurve

__all__ = [
    "Sign",
    "DeviationCurve",
    "ExtremalSet",
    "deviation_curve",
    "scaling_ell",
    "default_rho",
    "estimate_extremal_set",
    "grid_runs",
    "run_measure",
]

log = logging.getLogger(__name__)

Interval = tuple[float, float]


class Sign(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    BOTH = "both"


@dataclasses.dataclass(frozen=True, eq=False)
class DeviationCurve:
    """Grid-sampled deviation curve on ``I_n`` together with its supremum."""

    grid: np.ndarray
    values: np.ndarray
    interval: Interval
    bandwidth: float
    n: int
    sup: float = dataclasses.field(init=False)
    argmax_sign: Sign = dataclasses.field(init=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1 or grid.size == 0:
            raise ValueError("grid and values must be non-empty vectors of equal length")
        lo, hi = self.interval
        if grid[0] < lo - 1e-12 or grid[-1] > hi + 1e-12:
            raise ValueError(f"grid leaves the interval [{lo:.6g}, {hi:.6g}]")
        absolute = np.abs(values)
        sup = float(absolute.max())
        at_max = values[absolute >= sup - 1e-12 * max(1.0, sup)]
        if sup == 0.0 or (np.any(at_max > 0) and np.any(at_max < 0)):
            sign = Sign.BOTH
        elif at_max[0] > 0:
            sign = Sign.PLUS
        else:
            sign = Sign.MINUS
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sup", sup)
        object.__setattr__(self, "argmax_sign", sign)

    @property
    def cell(self) -> float:
        """Grid cell width (``1/n`` for a single-point grid)."""
        if self.grid.size < 2:
            return 1.0 / self.n
        return float(np.min(np.diff(self.grid)))

    @property
    def interval_length(self) -> float:
        return self.interval[1] - self.interval[0]

    @classmethod
    def from_values(
        cls,
        grid,
        values,
        bandwidth: float,
        n: int,
        interval: Optional[Interval] = None,
    ) -> "DeviationCurve":
        """Build a curve from precomputed values (the grid's span by default)."""
        grid = np.asarray(grid, dtype=float)
        if interval is None:
            interval = (float(grid[0]), float(grid[-1]))
        return cls(grid=grid, values=values, interval=interval, bandwidth=bandwidth, n=n)


@dataclasses.dataclass(frozen=True, eq=False)
class ExtremalSet:
    """Estimated extremal set, a finite union of closed grid intervals."""

    intervals: list[Interval]
    measure: float
    rho: float
    plus: list[Interval]
    minus: list[Interval]
    mask: np.ndarray = dataclasses.field(repr=False)
    grid: np.ndarray = dataclasses.field(repr=False)

    @property
    def points(self) -> np.ndarray:
        """Grid points belonging to the set."""
        return self.grid[self.mask]

    def as_pairs(self) -> list[list[float]]:
        return [[a, b] for a, b in self.intervals]


def deviation_curve(curve: SmoothCurve, g_hat: float) -> DeviationCurve:
    """``d_hat(t) = mu_tilde(t) - g_hat`` on the curve's grid."""
    return DeviationCurve(
        grid=curve.grid,
        values=curve.values - g_hat,
        interval=curve.interval,
        bandwidth=curve.bandwidth,
        n=curve.n,
    )


def scaling_ell(measure: float, h: float, lambda_k: float) -> float:
    """``sqrt(2 * log(Lambda_K * measure / (2 pi h)))``, never below ``sqrt 2``.

    The argument of the logarithm is clamped below at ``e``.
    """
    if not measure > 0 or not h > 0:
        raise ValueError(f"measure and h must be positive, got {measure!r}, {h!r}")
    argument = lambda_k * measure / (2.0 * math.pi * h)
    if argument < math.e:
        log.debug("scaling sequence clamped (log argument %.4g < e)", argument)
        argument = math.e
    return math.sqrt(2.0 * math.log(argument))


def default_rho(n: int, h: float, ell: float, epsilon: Optional[float] = None) -> float:
    """``ell^(1 + epsilon) / sqrt(n h)``."""
    # Avoid a cyclic import.
    import reldev

    if epsilon is None:
        epsilon = reldev.RHO_EPSILON
    if not ell > 0 or not n * h > 0:
        raise ValueError("ell and n*h must be positive")
    return ell ** (1.0 + epsilon) / math.sqrt(n * h)


def grid_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Index pairs ``(first, last)`` of the maximal runs of ``True`` in ``mask``."""
    padded = np.concatenate([[False], np.asarray(mask, dtype=bool), [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def _to_intervals(grid, mask) -> list[Interval]:
    return [(float(grid[a]), float(grid[b])) for a, b in grid_runs(mask)]


def run_measure(grid: np.ndarray, mask: np.ndarray, interval: Interval, cell: float) -> float:
    """Length of the runs of ``mask``, each widened by half a cell per side."""
    lo, hi = interval
    last = grid.size - 1
    total = 0.0
    for a, b in grid_runs(mask):
        left = lo if a == 0 else max(lo, grid[a] - cell / 2.0)
        right = hi if b == last else min(hi, grid[b] + cell / 2.0)
        total += right - left
    return max(total, cell) if np.any(mask) else 0.0


def estimate_extremal_set(dev: DeviationCurve, rho: float) -> ExtremalSet:
    """Grid points within ``rho`` of the supremum, for either sign of ``d_hat``."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    plus = dev.sup - dev.values <= rho
    minus = dev.sup + dev.values <= rho
    mask = plus | minus
    cell = dev.cell
    measure = run_measure(dev.grid, mask, dev.interval, cell)
    return ExtremalSet(
        intervals=_to_intervals(dev.grid, mask),
        measure=measure,
        rho=float(rho),
        plus=_to_intervals(dev.grid, plus),
        minus=_to_intervals(dev.grid, minus),
        mask=mask,
        grid=dev.grid,
    )
