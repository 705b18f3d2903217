# Mean functions of the simulation models
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import dataclasses
import math

import numpy as np

__all__ = [
    "MeanFunction",
    "Mu1",
    "Mu2",
    "ConstantMean",
    "CustomMean",
]


class MeanFunction:
    name = "mean"

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return self.name


@dataclasses.dataclass(frozen=True)
class Mu1(MeanFunction):
    """``10 + sin(8 pi x)/2 + a (x - 1/4)^2`` for ``x > 1/4``, without the last term before."""

    a: float = 0.0
    name = "mu1"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        trend = np.where(x > 0.25, self.a * (x - 0.25) ** 2, 0.0)
        return 10.0 + 0.5 * np.sin(8.0 * math.pi * x) + trend

    def describe(self) -> str:
        return f"mu1(a={self.a:g})"


@dataclasses.dataclass(frozen=True)
class Mu2(MeanFunction):
    """9 up to 1/4, ``1.5 sin(2 pi x) + 10.5`` up to 3/4, then 12."""

    name = "mu2"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        middle = 1.5 * np.sin(2.0 * math.pi * x) + 10.5
        return np.where(x <= 0.25, 9.0, np.where(x <= 0.75, middle, 12.0))


@dataclasses.dataclass(frozen=True)
class ConstantMean(MeanFunction):
    c: float = 0.0
    name = "constant"

    def __call__(self, x):
        return np.full(np.shape(x), float(self.c))

    def describe(self) -> str:
        return f"constant({self.c:g})"


@dataclasses.dataclass(frozen=True, eq=False)
class CustomMean(MeanFunction):
    """Piecewise-linear interpolation of ``values`` given on ``grid``."""

    grid: np.ndarray
    values: np.ndarray
    name = "custom"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1 or grid.size < 2:
            raise ValueError("a custom mean needs at least two (grid, value) pairs")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("the grid of a custom mean must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values)
