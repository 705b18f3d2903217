# Local-linear smoothing with Jackknife bias correction
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np
from scipy import signal

from .exceptions import NoValidBandwidth, SingularDesign, TooFewObservations
from .kernels import SQRT2, KernelSpec

__all__ = [
    "TimeSeries",
    "SmoothCurve",
    "CVResult",
    "analysis_interval",
    "default_grid",
    "local_linear_fit",
    "jackknife_curve",
    "fitted_values",
    "cross_validate",
    "cv_bandwidth",
    "default_cv_gap",
]

log = logging.getLogger(__name__)

MIN_OBSERVATIONS = 20

# Largest admissible condition number of the scaled 2x2 normal equations.
CONDITION_LIMIT = 1e12

# Weighted mass below this fraction of the kernel's total mass counts as
# "no observations" (guards against round-off in FFT-based moments).
MASS_FLOOR = 1e-10

# Upper bound on the number of entries of one weight block.
_BLOCK_ENTRIES = 2_000_000

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclasses.dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observations ``X_1..X_n`` at the equispaced design points ``i/n``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size == 0:
            raise TooFewObservations("a time series needs at least one value")
        if not np.all(np.isfinite(values)):
            raise ValueError("time series values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def design(self) -> np.ndarray:
        return np.arange(1, self.n + 1) / self.n

    def require(self, minimum: int = MIN_OBSERVATIONS) -> "TimeSeries":
        if self.n < minimum:
            raise TooFewObservations(
                f"{self.n} observations given, at least {minimum} are required"
            )
        return self

    def __len__(self):
        return self.n


@dataclasses.dataclass(frozen=True, eq=False)
class SmoothCurve:
    """The Jackknife estimate evaluated on a grid inside ``I_n``.

    ``n`` is the length of the series the curve was fitted to.
    """

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    interval: tuple[float, float]
    n: int

    def __post_init__(self):
        if not 1.0 / self.n < self.bandwidth < 0.5:
            raise ValueError(f"bandwidth {self.bandwidth:.6g} outside (1/n, 1/2)")
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1 or grid.size == 0:
            raise ValueError("grid and values must be non-empty vectors of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        lo, hi = self.interval
        if grid[0] < lo - 1e-12 or grid[-1] > hi + 1e-12:
            raise ValueError(f"grid leaves the interval [{lo:.6g}, {hi:.6g}]")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


@dataclasses.dataclass(frozen=True, eq=False)
class CVResult:
    bandwidth: float
    candidates: np.ndarray
    scores: np.ndarray
    folds: int
    seed: Optional[int]
    gap: int = 0

    def trace(self) -> list[list[float]]:
        """``[h, MSE_h]`` pairs of the valid candidates."""
        valid = np.isfinite(self.scores)
        return [
            [float(h), float(s)]
            for h, s in zip(self.candidates[valid], self.scores[valid])
        ]


def analysis_interval(h: float, x0: float = 0.0, x1: float = 1.0) -> tuple[float, float]:
    """Return ``I_n = [max(x0, h), min(x1, 1 - h)]``."""
    lo, hi = max(x0, h), min(x1, 1.0 - h)
    if lo > hi:
        raise ValueError(
            f"bandwidth {h:.6g} leaves an empty interval inside [{x0:.6g}, {x1:.6g}]"
        )
    return lo, hi


def default_grid(
    n: int, h: float, x0: float = 0.0, x1: float = 1.0, refine: int = 1
) -> np.ndarray:
    """Design points ``i/n`` inside ``I_n``, optionally refined ``refine``-fold."""
    if refine < 1:
        raise ValueError("refine must be at least 1")
    lo, hi = analysis_interval(h, x0, x1)
    design = np.arange(1, n + 1) / n
    base = design[(design >= lo - 1e-12) & (design <= hi + 1e-12)]
    if base.size == 0:
        raise ValueError(f"no design point lies in [{lo:.6g}, {hi:.6g}]")
    if refine == 1 or base.size == 1:
        return base
    steps = np.arange(refine) / (refine * n)
    return np.append((base[:-1, None] + steps[None, :]).ravel(), base[-1])


def _moments(x, y, t, h, k: KernelSpec, block=None):
    """Weighted moments ``S0, S1, S2, T0, T1`` in the scaled coordinate ``u``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((5, t.size))
    step = block or max(1, _BLOCK_ENTRIES // max(x.size, 1))
    reach = k.support_radius * h
    for start in range(0, t.size, step):
        stop = start + step
        block_t = t[start:stop]
        # x is sorted; only points within the kernel's reach carry weight.
        first = np.searchsorted(x, block_t.min() - reach, side="left")
        last = np.searchsorted(x, block_t.max() + reach, side="right")
        u = (x[None, first:last] - block_t[:, None]) / h
        w = k.func(u)
        wu = w * u
        out[0, start:stop] = w.sum(axis=1)
        out[1, start:stop] = wu.sum(axis=1)
        out[2, start:stop] = (wu * u).sum(axis=1)
        out[3, start:stop] = w @ y[first:last]
        out[4, start:stop] = wu @ y[first:last]
    return out


def _solve(moments, h, mass):
    """Solve the scaled normal equations; return ``(b0, slope, ok)``."""
    s0, s1, s2, t0, t1 = moments
    det = s0 * s2 - s1 * s1
    spread = np.sqrt((s0 - s2) ** 2 + 4.0 * s1 * s1)
    lmax = 0.5 * (s0 + s2 + spread)
    with np.errstate(divide="ignore", invalid="ignore"):
        lmin = np.where(lmax > 0, det / lmax, 0.0)
        ok = (s0 > MASS_FLOOR * mass) & (lmin > 0) & (lmax <= CONDITION_LIMIT * lmin)
        b0 = np.where(ok, (s2 * t0 - s1 * t1) / det, np.nan)
        b1 = np.where(ok, (s0 * t1 - s1 * t0) / det / h, np.nan)
    return b0, b1, ok


def _kernel_mass(n: int, h: float, k: KernelSpec) -> float:
    reach = int(math.floor(n * h)) + 1
    offsets = np.arange(-reach, reach + 1) / (n * h)
    return float(np.sum(k.func(offsets)))


def _local_linear(series: TimeSeries, k: KernelSpec, h: float, t):
    moments = _moments(series.design, series.values, t, h, k)
    b0, b1, ok = _solve(moments, h, _kernel_mass(series.n, h, k))
    if not np.all(ok):
        bad = np.atleast_1d(t)[np.argmin(ok)]
        raise SingularDesign(float(bad))
    return b0, b1


def _check_bandwidth(n: int, h: float) -> None:
    if not (1.0 / n < h < 0.5):
        raise ValueError(f"bandwidth {h:.6g} must lie in (1/n, 1/2) = ({1.0 / n:.6g}, 0.5)")


def local_linear_fit(
    series: TimeSeries, k: KernelSpec, h: float, t: float
) -> tuple[float, float]:
    """Local-linear intercept and slope at ``t`` with bandwidth ``h``."""
    series.require()
    _check_bandwidth(series.n, h)
    b0, b1 = _local_linear(series, k, h, [t])
    return float(b0[0]), float(b1[0])


def _jackknife(series: TimeSeries, k: KernelSpec, h: float, t) -> np.ndarray:
    narrow, _ = _local_linear(series, k, h / SQRT2, t)
    wide, _ = _local_linear(series, k, h, t)
    return 2.0 * narrow - wide


def jackknife_curve(
    series: TimeSeries,
    k: KernelSpec,
    h: float,
    grid: Optional[ArrayLike] = None,
    x0: float = 0.0,
    x1: float = 1.0,
    refine: int = 1,
) -> SmoothCurve:
    """Evaluate ``2 * mu_hat_{h/sqrt 2} - mu_hat_h`` on ``grid`` (default ``I_n``)."""
    series.require()
    _check_bandwidth(series.n, h)
    interval = analysis_interval(h, x0, x1)
    if grid is None:
        grid = default_grid(series.n, h, x0, x1, refine)
    grid = np.asarray(grid, dtype=float)
    values = _jackknife(series, k, h, grid)
    return SmoothCurve(
        grid=grid, values=values, bandwidth=h, interval=interval, n=series.n
    )


def fitted_values(series: TimeSeries, k: KernelSpec, h: float) -> np.ndarray:
    """Jackknife estimate at every design point, boundary points included."""
    series.require()
    _check_bandwidth(series.n, h)
    return _jackknife(series, k, h, series.design)


def _fold_ids(n: int, folds: int, seed, contiguous: bool) -> np.ndarray:
    if contiguous:
        return np.repeat(np.arange(folds), [len(c) for c in np.array_split(np.arange(n), folds)])
    rng = np.random.default_rng(seed)
    ids = np.empty(n, dtype=int)
    ids[rng.permutation(n)] = np.arange(n) % folds
    return ids


def _held_out_fit(values, fold_ids, folds, k: KernelSpec, bandwidth: float, gap: int = 0):
    """Intercepts at every design point, each fitted without its own fold.

    The fit at point ``j`` also leaves out every observation within ``gap``
    steps of ``j``.
    """
    n = values.size
    reach = int(math.floor(n * bandwidth))
    if reach < 1:
        return None
    offsets = np.arange(-reach, reach + 1)
    u = offsets / (n * bandwidth)
    w = k.func(u)
    member = (fold_ids[None, :] == np.arange(folds)[:, None]).astype(float)
    stacked = np.vstack([member, member * values[None, :]])

    def correlate(data, kernel):
        # Reversed kernel turns the convolution into sum_k data[j + k] * kernel[k].
        return signal.convolve(data, kernel[None, ::-1], mode="same")

    c0 = correlate(stacked, w)
    c1 = correlate(stacked, w * u)
    c2 = correlate(member, w * u * u)
    own = np.arange(n)
    s0 = c0[:folds].sum(axis=0) - c0[fold_ids, own]
    s1 = c1[:folds].sum(axis=0) - c1[fold_ids, own]
    s2 = c2.sum(axis=0) - c2[fold_ids, own]
    t0 = c0[folds:].sum(axis=0) - c0[folds + fold_ids, own]
    t1 = c1[folds:].sum(axis=0) - c1[folds + fold_ids, own]
    for offset in range(1, min(gap, reach) + 1):
        for shift in (offset, -offset):
            weight, position = w[reach + shift], u[reach + shift]
            here = own[max(0, -shift) : n - max(0, shift)]
            there = here + shift
            # Neighbours in the point's own fold are already excluded.
            other = np.where(fold_ids[there] != fold_ids[here], weight, 0.0)
            s0[here] -= other
            s1[here] -= other * position
            s2[here] -= other * position * position
            t0[here] -= other * values[there]
            t1[here] -= other * position * values[there]
    b0, _, ok = _solve(np.vstack([s0, s1, s2, t0, t1]), bandwidth, float(w.sum()))
    if not np.all(ok):
        return None
    return b0


def _candidates(n: int, thin: bool) -> np.ndarray:
    """Counts ``c`` of the candidate bandwidths ``c/n``, all below 1/2."""
    step = math.ceil(n / 100) if thin and n > 1000 else 1
    return np.arange(1, (n - 1) // 2 + 1, step)


def default_cv_gap(n: int) -> int:
    """Half of ``floor(n^(1/3))``, and at least 1."""
    root = int(math.floor(n ** (1.0 / 3.0) + 1e-9))
    return max(1, root // 2)


def cross_validate(
    series: TimeSeries,
    k: KernelSpec,
    folds: int = 10,
    seed=None,
    contiguous: bool = False,
    thin: bool = False,
    gap: Optional[int] = None,
) -> CVResult:
    """Score every candidate bandwidth ``c/n`` by k-fold prediction error.

    Folds are a seeded random partition of the observations into sets whose
    sizes differ by at most one (``contiguous=True`` uses consecutive
    blocks instead).  Each held-out point is predicted without its own fold
    and without the ``gap`` observations on either side of it.  ``gap``
    defaults to :func:`default_cv_gap`; ``gap=0`` gives plain k-fold
    cross-validation.  A candidate whose Jackknife fit is singular for some
    held-out point is skipped.
    """
    series.require()
    n = series.n
    if folds < 2 or n < 2 * folds:
        raise ValueError(f"need n >= 2 * folds, got n={n}, folds={folds}")
    if gap is None:
        gap = default_cv_gap(n)
    if gap < 0:
        raise ValueError(f"gap must be nonnegative, got {gap}")
    values = series.values
    fold_ids = _fold_ids(n, folds, seed, contiguous)
    counts = _candidates(n, thin)
    scores = np.full(counts.size, np.inf)
    for index, count in enumerate(counts):
        h = count / n
        narrow = _held_out_fit(values, fold_ids, folds, k, h / SQRT2, gap)
        if narrow is None:
            continue
        wide = _held_out_fit(values, fold_ids, folds, k, h, gap)
        if wide is None:
            continue
        residual = values - (2.0 * narrow - wide)
        scores[index] = float(np.sum(residual * residual)) / (1.0 - h / 2.0)

    if not np.any(np.isfinite(scores)):
        raise NoValidBandwidth(f"no candidate bandwidth gives a regular fit (n={n})")
    best = float(np.min(scores))
    tolerance = 1e-12 * best + 1e-20 * float(np.sum(values * values))
    chosen = int(np.argmax(scores <= best + tolerance))
    bandwidth = float(counts[chosen] / n)
    log.debug("cross-validation picked h=%.6g (MSE %.6g, gap %d)", bandwidth, best, gap)
    return CVResult(
        bandwidth=bandwidth,
        candidates=counts / n,
        scores=scores,
        folds=folds,
        seed=seed,
        gap=gap,
    )


def cv_bandwidth(
    series: TimeSeries,
    k: KernelSpec,
    folds: int = 10,
    seed=None,
    contiguous: bool = False,
    thin: bool = False,
    gap: Optional[int] = None,
) -> float:
    """Bandwidth chosen by :func:`cross_validate`."""
    return cross_validate(series, k, folds, seed, contiguous, thin, gap).bandwidth
