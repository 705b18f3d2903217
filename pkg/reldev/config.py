# Run configuration and config-file parsing
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import configparser
import dataclasses
import math
import os
from typing import Any, Optional, Union

from .benchmarks import BenchmarkKind, BenchmarkSpec
from .exceptions import ConfigError
from .smoothing import TimeSeries
from .testing import TestConfig, Variant

__all__ = [
    "RunConfig",
    "parse_benchmark",
    "read_config_file",
]

_SECTION = "reldev"


def parse_benchmark(text: str) -> BenchmarkSpec:
    """Parse ``initial``, ``partial-mean:<x0>``, ``full-mean`` or ``constant:<c>``."""
    kind, _, argument = text.strip().lower().partition(":")
    try:
        if kind == BenchmarkKind.INITIAL_VALUE.value and not argument:
            return BenchmarkSpec.initial_value()
        if kind == BenchmarkKind.FULL_MEAN.value and not argument:
            return BenchmarkSpec.full_mean()
        if kind == BenchmarkKind.PARTIAL_MEAN.value:
            return BenchmarkSpec.partial_mean(float(argument))
        if kind == BenchmarkKind.CONSTANT.value:
            return BenchmarkSpec.constant(float(argument))
    except ValueError as exception:
        raise ConfigError(f"invalid benchmark {text!r}: {exception}") from exception
    raise ConfigError(
        f"invalid benchmark {text!r}; expected initial, partial-mean:<x0>, "
        "full-mean or constant:<c>"
    )


def read_config_file(path: Union[str, os.PathLike]) -> dict[str, str]:
    """Read ``key = value`` lines; keys are returned with dashes as underscores."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as file:
            parser.read_string(f"[{_SECTION}]\n" + file.read(), source=str(path))
    except OSError as exception:
        raise ConfigError(f"cannot read config file {path}: {exception}") from exception
    except configparser.Error as exception:
        raise ConfigError(f"malformed config file {path}: {exception}") from exception
    return {key.replace("-", "_"): value for key, value in parser[_SECTION].items()}


@dataclasses.dataclass
class RunConfig:
    """Everything one pipeline run needs.

    Exactly one of ``input`` (path, URL or CSV text), ``series`` and
    ``scenario`` supplies the data.  ``bandwidth=None`` selects the
    bandwidth by cross-validation; ``block_length=None`` applies the
    residual-based block length rule.
    """

    input: Optional[str] = None
    series: Optional[TimeSeries] = None
    scenario: Any = None
    benchmark: BenchmarkSpec = dataclasses.field(default_factory=BenchmarkSpec.full_mean)
    delta: float = 1.0
    alpha: Optional[float] = None
    bandwidth: Optional[float] = None
    kernel: Optional[str] = None
    variant: Variant = Variant.SIMULATED_QUANTILE
    locally_stationary: bool = False
    x0: float = 0.0
    x1: float = 1.0
    seed: Optional[int] = None
    output: Optional[str] = None
    band_output: Optional[str] = None
    epoch_start: Optional[float] = None
    epoch_per_unit: float = 1.0
    folds: Optional[int] = None
    contiguous_folds: bool = False
    thin_cv: bool = False
    cv_gap: Optional[int] = None
    quantile_reps: Optional[int] = None
    use_ell_prime: bool = True
    refine: int = 1
    block_length: Optional[int] = None
    tau: Optional[float] = None
    m: Optional[int] = None
    first_change: bool = True
    delta_n: Optional[float] = None
    delta_n_constant: float = 2.0

    def __post_init__(self):
        # Avoid a cyclic import.
        import reldev

        if isinstance(self.benchmark, str):
            self.benchmark = parse_benchmark(self.benchmark)
        if self.alpha is None:
            self.alpha = reldev.DEFAULT_ALPHA
        if self.kernel is None:
            self.kernel = reldev.DEFAULT_KERNEL
        if self.folds is None:
            self.folds = reldev.DEFAULT_FOLDS
        if self.quantile_reps is None:
            self.quantile_reps = reldev.DEFAULT_QUANTILE_REPS
        try:
            self.variant = Variant(self.variant)
        except ValueError as exception:
            raise ConfigError(str(exception)) from exception
        self.validate()

    def validate(self) -> None:
        sources = [s for s in (self.input, self.series, self.scenario) if s is not None]
        if len(sources) != 1:
            raise ConfigError("exactly one of input, series and scenario must be given")
        if not math.isfinite(self.delta) or self.delta < 0:
            raise ConfigError(f"delta must be finite and nonnegative, got {self.delta!r}")
        if not 0.0 < self.alpha < 1.0:  # type: ignore[operator]
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0.0 <= self.x0 < self.x1 <= 1.0:
            raise ConfigError(f"need 0 <= x0 < x1 <= 1, got x0={self.x0}, x1={self.x1}")
        if self.bandwidth is not None and not 0.0 < self.bandwidth < 0.5:
            raise ConfigError(f"bandwidth must lie in (0, 1/2), got {self.bandwidth!r}")
        if self.cv_gap is not None and self.cv_gap < 0:
            raise ConfigError(f"cv_gap must be nonnegative, got {self.cv_gap!r}")
        if self.refine < 1:
            raise ConfigError("refine must be at least 1")
        if self.delta_n is not None and not 0.0 < self.delta_n < self.delta:
            raise ConfigError("delta_n must lie in (0, delta)")
        if self.locally_stationary:
            if self.block_length is not None:
                raise ConfigError(
                    "block_length belongs to the stationary variance estimate; "
                    "use m with locally_stationary"
                )
            if self.benchmark.kind not in (BenchmarkKind.CONSTANT, BenchmarkKind.FULL_MEAN):
                raise ConfigError(
                    "locally stationary runs support only the full-mean and constant benchmarks"
                )
        elif self.tau is not None or self.m is not None:
            raise ConfigError("tau and m are only used with locally_stationary")

    def test_config(self) -> TestConfig:
        return TestConfig(
            delta=self.delta,
            alpha=self.alpha,
            variant=self.variant,
            x0=self.x0,
            x1=self.x1,
            use_ell_prime=self.use_ell_prime,
            quantile_reps=self.quantile_reps,
            seed=self.seed,
        )
