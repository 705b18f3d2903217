# Error processes of the simulation models
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""Error processes driven by i.i.d. standard normal innovations ``eta_i``.

The three stationary processes share the marginal variance 1/4 and differ
in their long-run variance.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np
from scipy import signal

__all__ = [
    "ErrorProcess",
    "iid",
    "moving_average",
    "autoregressive",
    "heteroscedastic",
    "AR_BURN_IN",
]

AR_BURN_IN = 1000

Generator = Callable[[np.random.Generator, int], np.ndarray]


@dataclasses.dataclass(frozen=True)
class ErrorProcess:
    name: str
    generate: Generator
    long_run_variance: Optional[float] = None

    def __call__(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.generate(rng, n)


def iid(rng: np.random.Generator, n: int) -> np.ndarray:
    return 0.5 * rng.standard_normal(n)


def moving_average(rng: np.random.Generator, n: int) -> np.ndarray:
    eta = rng.standard_normal(n + 1)
    return (eta[1:] + 0.5 * eta[:-1]) / math.sqrt(5.0)


def autoregressive(rng: np.random.Generator, n: int) -> np.ndarray:
    """``e_i = e_{i-1}/2 + sqrt(3)/4 * eta_i`` started at zero before a burn-in."""
    eta = rng.standard_normal(AR_BURN_IN + n)
    path = signal.lfilter([math.sqrt(3.0) / 4.0], [1.0, -0.5], eta)
    return path[AR_BURN_IN:]


def heteroscedastic(rng: np.random.Generator, n: int) -> np.ndarray:
    """``e_i = (1 + i/n) * eta_i / 2``; the local variance is ``(1 + t)^2 / 4``."""
    scale = 1.0 + np.arange(1, n + 1) / n
    return 0.5 * scale * rng.standard_normal(n)
