# Time of the first relevant deviation
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from typing import Optional

import numpy as np

from .deviation import DeviationCurve, scaling_ell
from .exceptions import InvalidMargin, MarginWarning
from .kernels import KernelSpec

__all__ = [
    "FirstExceedance",
    "first_exceedance",
    "default_delta_n",
    "to_epoch",
]

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class FirstExceedance:
    """Estimated first time ``|d_hat|`` reaches ``delta - delta_n``.

    ``t_star_hat`` is ``math.inf`` when the threshold is never reached.
    """

    t_star_hat: float
    delta_n: float
    threshold_used: float

    @property
    def detected(self) -> bool:
        return math.isfinite(self.t_star_hat)


def first_exceedance(dev: DeviationCurve, delta: float, delta_n: float) -> FirstExceedance:
    """First crossing of ``delta - delta_n`` by the running maximum of ``|d_hat|``.

    The crossing is interpolated linearly inside the grid cell where it
    happens; a crossing at the first grid point is reported as the left end
    of the analysis interval.
    """
    if not 0.0 < delta_n < delta:
        raise InvalidMargin(f"need 0 < delta_n < delta, got delta_n={delta_n!r}, delta={delta!r}")
    threshold = delta - delta_n
    absolute = np.abs(dev.values)
    reached = np.flatnonzero(absolute >= threshold)
    if reached.size == 0:
        return FirstExceedance(math.inf, delta_n, threshold)

    index = int(reached[0])
    if index == 0:
        t_star = dev.interval[0]
    else:
        left, right = dev.grid[index - 1], dev.grid[index]
        below, above = absolute[index - 1], absolute[index]
        t_star = float(left + (threshold - below) / (above - below) * (right - left))
    log.debug("first exceedance of %.4g at t=%.6g", threshold, t_star)
    return FirstExceedance(t_star, delta_n, threshold)


def default_delta_n(
    sigma_hat: float,
    k: KernelSpec,
    n: int,
    h: float,
    c: float = 2.0,
    measure: Optional[float] = None,
) -> float:
    """``c * sigma_hat * ||K*||_2 * ell / sqrt(n h)``.

    ``measure`` is the length entering ``ell``; it defaults to ``1 - 2h``,
    the analysis interval over the whole unit interval.
    """
    if not c > 0:
        raise ValueError(f"c must be positive, got {c!r}")
    if c <= 1.0:
        warnings.warn(
            f"c={c:g} does not exceed 1; the margin is too small for consistent "
            "estimation of the first relevant deviation",
            MarginWarning,
            stacklevel=2,
        )
    if measure is None:
        measure = 1.0 - 2.0 * h
    ell = scaling_ell(measure, h, k.lambda_k)
    return c * sigma_hat * k.l2_norm_kstar * ell / math.sqrt(n * h)


def to_epoch(t: float, n: int, start: float, per_unit: float = 1.0) -> float:
    """Map ``t`` in ``[0, 1]`` to calendar units: ``start + round(t n) / per_unit``."""
    if not math.isfinite(t):
        return t
    if not per_unit > 0:
        raise ValueError(f"per_unit must be positive, got {per_unit!r}")
    return start + math.floor(t * n + 0.5) / per_unit
