# Estimators of the benchmark functional g(mu)
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import warnings
from typing import Optional

import numpy as np

from .exceptions import BandwidthClampWarning, BandwidthOverflow
from .kernels import KernelSpec
from .smoothing import TimeSeries, _jackknife

__all__ = [
    "BenchmarkKind",
    "BenchmarkSpec",
    "estimate_benchmark",
    "inflated_bandwidth",
    "check_initial_value_rate",
]

log = logging.getLogger(__name__)

# Inflated bandwidths above this value are clamped.
CLAMP_BANDWIDTH = 0.49


class BenchmarkKind(enum.Enum):
    INITIAL_VALUE = "initial"
    PARTIAL_MEAN = "partial-mean"
    FULL_MEAN = "full-mean"
    CONSTANT = "constant"


@dataclasses.dataclass(frozen=True)
class BenchmarkSpec:
    """Which scalar summary of the mean function deviations are measured from."""

    kind: BenchmarkKind
    x0: Optional[float] = None
    c: Optional[float] = None

    def __post_init__(self):
        if self.kind is BenchmarkKind.PARTIAL_MEAN:
            if self.x0 is None or not 0.0 < self.x0 < 1.0:
                raise ValueError(f"partial mean needs 0 < x0 < 1, got {self.x0!r}")
        if self.kind is BenchmarkKind.CONSTANT:
            if self.c is None or not math.isfinite(self.c):
                raise ValueError(f"constant benchmark needs a finite value, got {self.c!r}")

    @classmethod
    def initial_value(cls) -> "BenchmarkSpec":
        return cls(BenchmarkKind.INITIAL_VALUE)

    @classmethod
    def partial_mean(cls, x0: float) -> "BenchmarkSpec":
        return cls(BenchmarkKind.PARTIAL_MEAN, x0=float(x0))

    @classmethod
    def full_mean(cls) -> "BenchmarkSpec":
        return cls(BenchmarkKind.FULL_MEAN)

    @classmethod
    def constant(cls, c: float) -> "BenchmarkSpec":
        return cls(BenchmarkKind.CONSTANT, c=float(c))

    def __str__(self):
        if self.kind is BenchmarkKind.PARTIAL_MEAN:
            return f"{self.kind.value}:{self.x0:g}"
        if self.kind is BenchmarkKind.CONSTANT:
            return f"{self.kind.value}:{self.c:g}"
        return self.kind.value


def inflated_bandwidth(h: float, clamp: bool = True) -> float:
    """Return ``h * log(h)**2`` (natural logarithm), the initial-value bandwidth."""
    if not 0.0 < h < 1.0:
        raise ValueError(f"bandwidth must lie in (0, 1), got {h!r}")
    inflated = h * math.log(h) ** 2
    if clamp and inflated > CLAMP_BANDWIDTH:
        warnings.warn(
            f"inflated bandwidth {inflated:.4g} clamped to {CLAMP_BANDWIDTH}",
            BandwidthClampWarning,
            stacklevel=3,
        )
        return CLAMP_BANDWIDTH
    if inflated >= 0.5:
        raise BandwidthOverflow(
            f"inflated bandwidth h*log(h)^2 = {inflated:.4g} is not below 1/2"
        )
    return inflated


def check_initial_value_rate(n: int, h: float) -> float:
    """Evaluate ``n * h^7 * |log h|^12``; log a warning when it exceeds one."""
    value = n * h**7 * abs(math.log(h)) ** 12
    if value > 1.0:
        log.warning(
            "initial-value benchmark: n*h^7*|log h|^12 = %.3g > 1 (n=%d, h=%.4g); "
            "its estimation error may not be negligible",
            value,
            n,
            h,
        )
    return value


def _partial_count(x0: float, n: int) -> int:
    return int(math.floor(x0 * n + 1e-9))


def estimate_benchmark(
    spec: BenchmarkSpec,
    series: TimeSeries,
    k: KernelSpec,
    h: float,
    clamp: bool = True,
) -> float:
    """Estimate ``g(mu)`` for the benchmark described by ``spec``."""
    if spec.kind is BenchmarkKind.CONSTANT:
        return float(spec.c)  # type: ignore[arg-type]
    if spec.kind is BenchmarkKind.FULL_MEAN:
        return float(np.mean(series.values))
    if spec.kind is BenchmarkKind.PARTIAL_MEAN:
        count = _partial_count(spec.x0, series.n)  # type: ignore[arg-type]
        if count < 1:
            raise ValueError(
                f"partial mean over x0={spec.x0:g} covers no observation (n={series.n})"
            )
        return float(np.mean(series.values[:count]))

    series.require()
    wide = inflated_bandwidth(h, clamp=clamp)
    check_initial_value_rate(series.n, h)
    return float(_jackknife(series, k, wide, [0.0])[0])
