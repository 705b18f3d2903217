# Locally stationary errors: time-varying long-run variance and the standardized test
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""Relevant deviations measured on the signal-to-noise scale.

When the error law drifts over time the deviation is compared relative to
the local long-run standard deviation, ``mu(t)/sigma(t) - g``.  The local
long-run variance is a kernel average of squared block-sum differences;
it is defined on ``[m/n, 1 - m/n]`` and extended by constants outside.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from typing import Optional

import numpy as np

from .benchmarks import BenchmarkKind, BenchmarkSpec
from .deviation import DeviationCurve, ExtremalSet
from .exceptions import BlockTooLarge, DegenerateVariance, VarianceFloorWarning
from .kernels import KernelSpec
from .smoothing import SmoothCurve, TimeSeries, _moments, fitted_values
from .testing import TestConfig, TestOutcome, run_test

__all__ = [
    "LocalLrvCurve",
    "local_lrv_curve",
    "standardized_deviation",
    "standardized_benchmark",
    "ls_test",
    "default_ls_smoothing",
    "check_ls_rates",
]

log = logging.getLogger(__name__)

LRV_FLOOR = 1e-12

# Exponent c of the default bandwidth n^(-c) when none is in force.
DEFAULT_BANDWIDTH_EXPONENT = 0.46


@dataclasses.dataclass(frozen=True, eq=False)
class LocalLrvCurve:
    grid: np.ndarray
    values: np.ndarray
    tau: float
    m: int
    boundary_lo: float
    boundary_hi: float

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.values)

    @property
    def floored(self) -> np.ndarray:
        return self.values <= LRV_FLOOR


def _block_differences(values: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Positions ``j/n`` and ``(S_{j-m+1,j} - S_{j+1,j+m})^2 / (2m)`` for ``m <= j <= n-m``."""
    n = values.size
    prefix = np.concatenate([[0.0], np.cumsum(values)])
    j = np.arange(m, n - m + 1)
    left = prefix[j] - prefix[j - m]
    right = prefix[j + m] - prefix[j]
    return j / n, (left - right) ** 2 / (2.0 * m)


def local_lrv_curve(
    series: TimeSeries,
    k: KernelSpec,
    tau: float,
    m: int,
    grid: Optional[np.ndarray] = None,
) -> LocalLrvCurve:
    """Kernel-weighted local long-run variance on ``grid`` (design points by default)."""
    n = series.n
    if m < 1:
        raise ValueError(f"block length must be at least 1, got {m}")
    if 2 * m >= n:
        raise BlockTooLarge(f"block length {m} is not below n/2 (n={n})")
    if not 1.0 / n < tau < 0.5:
        raise ValueError(f"tau {tau:.6g} must lie in (1/n, 1/2)")
    grid = series.design if grid is None else np.asarray(grid, dtype=float)

    positions, squares = _block_differences(series.values, m)
    lo, hi = m / n, 1.0 - m / n
    # Evaluating at the clipped point gives the constant extension.
    where = np.clip(grid, lo, hi)
    moments = _moments(positions, squares, np.concatenate([where, [lo, hi]]), tau, k)
    estimate = moments[3] / moments[0]

    low = estimate < LRV_FLOOR
    if np.any(low):
        warnings.warn(
            f"local long-run variance below {LRV_FLOOR:g} at {int(np.count_nonzero(low))} "
            "points; floored",
            VarianceFloorWarning,
            stacklevel=2,
        )
        estimate = np.maximum(estimate, LRV_FLOOR)
    return LocalLrvCurve(
        grid=grid,
        values=estimate[:-2],
        tau=float(tau),
        m=int(m),
        boundary_lo=float(estimate[-2]),
        boundary_hi=float(estimate[-1]),
    )


def standardized_deviation(
    curve: SmoothCurve, lrv: LocalLrvCurve, g_hat: float
) -> DeviationCurve:
    """``mu_tilde(t) / sigma_hat(t) - g_hat`` on the smooth curve's grid."""
    if lrv.grid.shape != curve.grid.shape or not np.allclose(lrv.grid, curve.grid):
        raise ValueError("the variance curve must be evaluated on the smooth curve's grid")
    if np.any(lrv.floored):
        raise DegenerateVariance(
            "local long-run variance is at its floor; the standardized deviation is undefined"
        )
    return DeviationCurve(
        grid=curve.grid,
        values=curve.values / lrv.sigma - g_hat,
        interval=curve.interval,
        bandwidth=curve.bandwidth,
        n=curve.n,
    )


def standardized_benchmark(
    spec: BenchmarkSpec,
    series: TimeSeries,
    k: KernelSpec,
    h: float,
    tau: float,
    m: int,
) -> float:
    """Benchmark on the standardized scale: a constant, or the mean of ``mu_tilde/sigma_hat``."""
    if spec.kind is BenchmarkKind.CONSTANT:
        return float(spec.c)  # type: ignore[arg-type]
    if spec.kind is not BenchmarkKind.FULL_MEAN:
        raise ValueError(
            f"benchmark {spec} is not available for locally stationary errors; "
            "use full-mean or constant:<c>"
        )
    lrv = local_lrv_curve(series, k, tau, m)
    if np.any(lrv.floored):
        raise DegenerateVariance("local long-run variance is at its floor")
    return float(np.mean(fitted_values(series, k, h) / lrv.sigma))


def ls_test(
    dev_sigma: DeviationCurve,
    eset: ExtremalSet,
    k: KernelSpec,
    cfg: TestConfig,
) -> TestOutcome:
    """Test on the standardized deviation; the statistic carries no variance factor.

    Every variant runs as in :func:`reldev.testing.run_test` with
    ``sigma_hat = 1``.  The band and simple tests take ``ell`` over the
    analysis interval, the other two over ``eset``.
    """
    return run_test(dev_sigma, eset, 1.0, k, cfg)


def default_ls_smoothing(n: int, h: Optional[float] = None) -> tuple[float, int]:
    """Return ``(tau, m)`` with ``m = |log h|^(1/2) log(n) sqrt(n h)`` and ``tau = m^(-1/2)``.

    ``h`` defaults to ``n^(-0.46)``.  ``m`` is rounded, at least 2 and below
    ``n/2``; ``tau`` is clamped to ``[2/n, 0.49]``.
    """
    if n < 100:
        raise ValueError(f"locally stationary smoothing needs n >= 100, got {n}")
    if h is None:
        h = n ** (-DEFAULT_BANDWIDTH_EXPONENT)
    m = int(round(math.sqrt(abs(math.log(h))) * math.log(n) * math.sqrt(n * h)))
    m = min(max(m, 2), (n - 1) // 2)
    tau = min(max(m**-0.5, 2.0 / n), 0.49)
    log.debug("locally stationary smoothing: h=%.4g tau=%.4g m=%d", h, tau, m)
    return tau, m


def check_ls_rates(n: int, h: float, tau: float, m: int) -> dict[str, float]:
    """Evaluate the rate expressions coupling ``h``, ``tau`` and ``m``.

    ``bandwidth`` only has to stay bounded.  Every other entry should be
    small; those above one are logged as warnings.
    """
    log_h = abs(math.log(h))
    rates = {
        "variance": m**0.25 / (math.sqrt(n) * tau) + 1.0 / m + tau**2 + m**2.5 / n,
        "bandwidth": log_h * math.log(n) ** 4 / (math.sqrt(n) * h),
        "bias": log_h * n * h**7,
        "coupling": math.sqrt(log_h)
        * (
            m**0.25 * math.sqrt(h) / tau
            + math.sqrt(n * h) / m
            + math.sqrt(n * h) * tau**2
            + math.sqrt(h * m**5 / n)
        ),
    }
    for name, value in rates.items():
        if name != "bandwidth" and value > 1.0:
            log.warning(
                "locally stationary %s rate is %.3g > 1 (n=%d, h=%.4g, tau=%.4g, m=%d)",
                name,
                value,
                n,
                h,
                tau,
                m,
            )
    return rates
