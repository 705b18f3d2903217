# Long-run variance estimation for stationary errors
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""Difference-of-blocks long-run variance estimator.

:func:`lrv_estimate` works on the *raw* observations: differencing adjacent
block sums cancels a slowly varying mean.  :func:`block_length_rule` works
on *residuals* ``X_i - mu_tilde(i/n)`` and picks the block length from
their first four autocovariances.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Union

import numpy as np

from .exceptions import BlockTooLarge
from .smoothing import TimeSeries

__all__ = [
    "LrvEstimate",
    "lrv_estimate",
    "block_length_rule",
    "default_block_length",
    "autocovariances",
]

log = logging.getLogger(__name__)

# Number of autocovariance lags entering the block length rule.
RULE_LAGS = 4


@dataclasses.dataclass(frozen=True)
class LrvEstimate:
    sigma2: float
    block_length: int

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError(f"sigma2 must be nonnegative, got {self.sigma2!r}")
        if self.block_length < 1:
            raise ValueError("block_length must be at least 1")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def _values(data: Union[TimeSeries, np.ndarray]) -> np.ndarray:
    if isinstance(data, TimeSeries):
        return data.values
    return np.asarray(data, dtype=float).ravel()


def icbrt(n: int) -> int:
    """Integer part of the cube root of ``n``, exact for perfect cubes."""
    root = int(round(n ** (1.0 / 3.0)))
    while root**3 > n:
        root -= 1
    while (root + 1) ** 3 <= n:
        root += 1
    return root


def default_block_length(n: int) -> int:
    """``floor(n^(1/3))``, used when no residuals are available."""
    return max(1, icbrt(n))


def lrv_estimate(series: Union[TimeSeries, np.ndarray], m: int) -> LrvEstimate:
    """Average squared difference of adjacent block sums of length ``m``."""
    values = _values(series)
    n = values.size
    if m < 1:
        raise ValueError(f"block length must be at least 1, got {m}")
    blocks = n // m
    if blocks < 2:
        raise BlockTooLarge(f"block length {m} leaves fewer than two blocks (n={n})")
    sums = values[: blocks * m].reshape(blocks, m).sum(axis=1)
    diffs = sums[:-1] - sums[1:]
    sigma2 = float(np.sum(diffs * diffs)) / (2.0 * m * (blocks - 1))
    return LrvEstimate(sigma2=sigma2, block_length=int(m))


def autocovariances(residuals: Union[TimeSeries, np.ndarray], lags: int) -> np.ndarray:
    """Biased (divide-by-n) empirical autocovariances at lags ``0..lags``."""
    e = _values(residuals)
    n = e.size
    if n <= lags:
        raise ValueError(f"need more than {lags} residuals, got {n}")
    e = e - e.mean()
    return np.array([float(np.dot(e[: n - k], e[k:])) / n for k in range(lags + 1)])


def block_length_rule(residuals: Union[TimeSeries, np.ndarray]) -> int:
    """Data-driven block length from the residual autocovariances.

    ``m = max(floor(sqrt(sum_{k=1..4} |g_k| / sum_{k=0..4} |g_k|) * n^(1/3)), 1)``
    """
    e = _values(residuals)
    n = e.size
    if n < RULE_LAGS + 1:
        raise ValueError(f"block length rule needs at least {RULE_LAGS + 1} residuals")
    gamma = np.abs(autocovariances(e, RULE_LAGS))
    total = float(gamma.sum())
    if total == 0.0:
        return 1
    ratio = float(gamma[1:].sum()) / total
    m = max(int(math.floor(math.sqrt(ratio) * n ** (1.0 / 3.0))), 1)
    log.debug("block length rule: ratio %.4g gives m=%d (n=%d)", ratio, m, n)
    return m
