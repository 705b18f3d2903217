# Smoothing kernels, the Jackknife kernel K* and its constants
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""Kernel functions for the local-linear estimator.

Every scaling sequence in the package depends on two constants of the
Jackknife kernel ``K*(x) = 2*sqrt(2)*K(sqrt(2)*x) - K(x)``: its L2 norm and
``Lambda_K = ||(K*)'||_2 / ||K*||_2``.  They are computed once per kernel by
adaptive quadrature and cached on the immutable :class:`KernelSpec`.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .exceptions import InvalidKernel, QuadratureFailure

__all__ = [
    "KernelSpec",
    "kstar_eval",
    "kernel_constants",
    "make_kernel",
    "get_kernel",
    "kernel_names",
    "quartic",
    "epanechnikov",
]

SQRT2 = math.sqrt(2.0)

# Absolute/relative tolerances handed to scipy's QUADPACK wrapper.
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8

# Step of the central difference used for kernels without a derivative.
DIFF_STEP = 1e-6

KernelFunc = Callable[[np.ndarray], np.ndarray]


def quartic(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, 15.0 / 16.0 * (1.0 - x * x) ** 2, 0.0)


def quartic_derivative(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, -15.0 / 4.0 * x * (1.0 - x * x), 0.0)


def epanechnikov(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, 0.75 * (1.0 - x * x), 0.0)


def epanechnikov_derivative(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < 1.0, -1.5 * x, 0.0)


_builtin_kernels: dict[str, tuple[KernelFunc, KernelFunc]] = {
    "quartic": (quartic, quartic_derivative),
    "epanechnikov": (epanechnikov, epanechnikov_derivative),
}


@dataclasses.dataclass(frozen=True)
class KernelSpec:
    """An admissible kernel together with its derived constants.

    Construction validates ``func`` and, unless both are given, computes
    ``l2_norm_kstar`` and ``lambda_k``.
    """

    name: str
    func: KernelFunc = dataclasses.field(repr=False)
    derivative: Optional[KernelFunc] = dataclasses.field(repr=False, default=None)
    support_radius: float = 1.0
    l2_norm_kstar: float = math.nan
    lambda_k: float = math.nan

    def __post_init__(self):
        _validate(self.name, self.func)
        if math.isnan(self.l2_norm_kstar) or math.isnan(self.lambda_k):
            l2_norm, lambda_k = kernel_constants(self.func, self.derivative)
            object.__setattr__(self, "l2_norm_kstar", l2_norm)
            object.__setattr__(self, "lambda_k", lambda_k)

    def __call__(self, x):
        return self.func(x)

    def kstar(self, x):
        return kstar_eval(self, x)

    def kstar_derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.derivative is None:
            return _central_difference(lambda u: kstar_eval(self, u), x)
        return np.where(
            np.abs(x) < 1.0,
            4.0 * self.derivative(SQRT2 * x) - self.derivative(x),
            0.0,
        )


def kstar_eval(k: KernelSpec, x):
    """Evaluate ``K*(x) = 2*sqrt(2)*K(sqrt(2)*x) - K(x)``, zero for ``|x| >= 1``."""
    x = np.asarray(x, dtype=float)
    value = 2.0 * SQRT2 * k.func(SQRT2 * x) - k.func(x)
    value = np.where(np.abs(x) >= 1.0, 0.0, value)
    if value.ndim == 0:
        return float(value)
    return value


def _central_difference(func, x):
    return (func(x + DIFF_STEP) - func(x - DIFF_STEP)) / (2.0 * DIFF_STEP)


def _quad(integrand, lower=-1.0, upper=1.0, points=None):
    result = integrate.quad(
        lambda u: float(integrand(u)),
        lower,
        upper,
        epsabs=QUAD_EPSABS,
        epsrel=QUAD_EPSREL,
        limit=200,
        points=points,
        full_output=1,
    )
    # QUADPACK appends a message when it could not reach the tolerance.
    if len(result) > 3:
        raise QuadratureFailure(result[3])
    return result[0]


def kernel_constants(
    k_eval: KernelFunc, derivative: Optional[KernelFunc] = None
) -> tuple[float, float]:
    """Return ``(||K*||_2, Lambda_K)`` for the kernel ``k_eval``.

    ``derivative`` is the analytic derivative of ``K``; without it the
    derivative of ``K*`` is approximated by central differences.
    """

    def kstar(u):
        return 2.0 * SQRT2 * k_eval(SQRT2 * u) - k_eval(u)

    if derivative is not None:

        def kstar_prime(u):
            return 4.0 * derivative(SQRT2 * u) - derivative(u)

    else:

        def kstar_prime(u):
            return _central_difference(kstar, u)

    # K(sqrt(2) x) has its support edge at 1/sqrt(2); split there.
    breaks = [-1.0 / SQRT2, 0.0, 1.0 / SQRT2]
    norm2 = _quad(lambda u: kstar(u) ** 2, points=breaks)
    deriv2 = _quad(lambda u: kstar_prime(u) ** 2, points=breaks)
    l2_norm = math.sqrt(norm2)
    lambda_k = math.sqrt(deriv2) / l2_norm
    if not (math.isfinite(l2_norm) and l2_norm > 0):
        raise QuadratureFailure("||K*||_2 is not finite and positive")
    if not (math.isfinite(lambda_k) and lambda_k > 0):
        raise QuadratureFailure("Lambda_K is not finite and positive")
    return l2_norm, lambda_k


def _validate(name: str, func: KernelFunc) -> None:
    points = np.linspace(0.0, 1.0, 201)
    if not np.allclose(func(points), func(-points), rtol=0.0, atol=1e-12):
        raise InvalidKernel(f"kernel {name!r} is not symmetric")
    outside = np.linspace(1.0 + 1e-9, 3.0, 101)
    if np.any(func(outside) != 0.0) or np.any(func(-outside) != 0.0):
        raise InvalidKernel(f"kernel {name!r} is not supported on [-1, 1]")
    mass = _quad(func, points=[0.0])
    if abs(mass - 1.0) > 1e-8:
        raise InvalidKernel(f"kernel {name!r} integrates to {mass:.10g}, not 1")


def make_kernel(
    name: str, func: KernelFunc, derivative: Optional[KernelFunc] = None
) -> KernelSpec:
    """Validate ``func`` and build a :class:`KernelSpec` with its constants."""
    return KernelSpec(name=name, func=func, derivative=derivative)


@functools.lru_cache(maxsize=None)
def get_kernel(name: str = "quartic") -> KernelSpec:
    """Return the built-in kernel called ``name``."""
    try:
        func, derivative = _builtin_kernels[name.lower()]
    except KeyError:
        known = ", ".join(sorted(_builtin_kernels))
        raise InvalidKernel(f"unknown kernel {name!r} (choose from {known})")
    return make_kernel(name.lower(), func, derivative)


def kernel_names() -> list[str]:
    return sorted(_builtin_kernels)
