# Simulation models and the Monte Carlo experiment runner
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

from typing import Callable

from .errors import (
    ErrorProcess,
    autoregressive,
    heteroscedastic,
    iid,
    moving_average,
)
from .means import ConstantMean, CustomMean, MeanFunction, Mu1, Mu2

__all__ = [
    "ErrorProcess",
    "MeanFunction",
    "Mu1",
    "Mu2",
    "ConstantMean",
    "CustomMean",
    "register_error_process",
    "get_error_process",
    "error_process_names",
    "register_mean",
    "make_mean",
]

_error_processes: dict[str, ErrorProcess] = {}
_means: dict[str, Callable[..., MeanFunction]] = {}


def register_error_process(process: ErrorProcess) -> None:
    """Register an error process under its name (later registrations win)."""
    _error_processes[process.name] = process


def get_error_process(name: str) -> ErrorProcess:
    try:
        return _error_processes[name.lower()]
    except KeyError:
        known = ", ".join(sorted(_error_processes))
        raise ValueError(f"unknown error process {name!r} (choose from {known})")


def error_process_names() -> list[str]:
    return sorted(_error_processes)


def register_mean(name: str, factory: Callable[..., MeanFunction]) -> None:
    """Register a mean function factory taking keyword parameters."""
    _means[name] = factory


def make_mean(name: str, **params) -> MeanFunction:
    try:
        factory = _means[name.lower()]
    except KeyError:
        known = ", ".join(sorted(_means))
        raise ValueError(f"unknown mean function {name!r} (choose from {known})")
    return factory(**params)


register_error_process(ErrorProcess("iid", iid, long_run_variance=0.25))
register_error_process(ErrorProcess("ma", moving_average, long_run_variance=0.45))
register_error_process(ErrorProcess("ar", autoregressive, long_run_variance=0.75))
register_error_process(ErrorProcess("hetero", heteroscedastic))
register_mean("mu1", Mu1)
register_mean("mu2", Mu2)
register_mean("constant", ConstantMean)
register_mean("custom", CustomMean)
