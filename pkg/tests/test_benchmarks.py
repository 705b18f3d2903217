import logging
import math

import numpy as np
import pytest

from reldev.benchmarks import (
    BenchmarkKind,
    BenchmarkSpec,
    check_initial_value_rate,
    estimate_benchmark,
    inflated_bandwidth,
)
from reldev.exceptions import BandwidthClampWarning, BandwidthOverflow
from reldev.smoothing import TimeSeries

from .helpers import series_from


def test_spec_strings():
    assert str(BenchmarkSpec.partial_mean(0.25)) == "partial-mean:0.25"
    assert str(BenchmarkSpec.constant(10)) == "constant:10"
    assert str(BenchmarkSpec.initial_value()) == "initial"
    assert str(BenchmarkSpec.full_mean()) == "full-mean"


@pytest.mark.parametrize(
    "kind, x0, c",
    (
        (BenchmarkKind.PARTIAL_MEAN, None, None),
        (BenchmarkKind.PARTIAL_MEAN, 0.0, None),
        (BenchmarkKind.PARTIAL_MEAN, 1.0, None),
        (BenchmarkKind.CONSTANT, None, None),
        (BenchmarkKind.CONSTANT, None, math.inf),
    ),
)
def test_spec_validation(kind, x0, c):
    with pytest.raises(ValueError):
        BenchmarkSpec(kind, x0=x0, c=c)


def test_inflated_bandwidth():
    h = 0.02
    assert inflated_bandwidth(h) == pytest.approx(h * math.log(h) ** 2)
    with pytest.raises(ValueError):
        inflated_bandwidth(0.0)


def test_inflated_bandwidth_clamps():
    # 0.1 * log(0.1)^2 is about 0.53
    with pytest.warns(BandwidthClampWarning):
        assert inflated_bandwidth(0.1) == 0.49


def test_inflated_bandwidth_overflow():
    with pytest.raises(BandwidthOverflow):
        inflated_bandwidth(0.1, clamp=False)
    # 0.06 * log(0.06)^2 is about 0.475: below the clamp, not an error
    assert inflated_bandwidth(0.06, clamp=False) < 0.49


def test_constant_benchmark_ignores_data(quartic):
    series = series_from(lambda x: x, 50)
    assert estimate_benchmark(BenchmarkSpec.constant(10.0), series, quartic, 0.1) == 10.0


def test_full_mean(quartic):
    series = TimeSeries(np.arange(1.0, 101.0))
    assert estimate_benchmark(BenchmarkSpec.full_mean(), series, quartic, 0.1) == 50.5


@pytest.mark.parametrize("x0, expected", ((0.25, 13.0), (0.1, 5.5), (0.999, 50.0)))
def test_partial_mean_uses_floor_of_x0_n(quartic, x0, expected):
    series = TimeSeries(np.arange(1.0, 101.0))
    value = estimate_benchmark(BenchmarkSpec.partial_mean(x0), series, quartic, 0.1)
    assert value == pytest.approx(expected)


def test_partial_mean_needs_one_observation(quartic):
    series = TimeSeries(np.arange(1.0, 51.0))
    with pytest.raises(ValueError, match="covers no observation"):
        estimate_benchmark(BenchmarkSpec.partial_mean(0.01), series, quartic, 0.1)


def test_initial_value_of_an_affine_mean(quartic):
    series = series_from(lambda x: 2.0 + 5.0 * x, 400)
    value = estimate_benchmark(BenchmarkSpec.initial_value(), series, quartic, 0.02)
    assert value == pytest.approx(2.0, abs=1e-9)


def test_initial_value_with_clamped_bandwidth(quartic):
    series = series_from(lambda x: 1.0 - x, 200)
    with pytest.warns(BandwidthClampWarning):
        value = estimate_benchmark(BenchmarkSpec.initial_value(), series, quartic, 0.1)
    assert value == pytest.approx(1.0, abs=1e-9)


def test_initial_value_rate_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="reldev.benchmarks"):
        assert check_initial_value_rate(100, 0.001) < 1.0
        assert not caplog.records
        assert check_initial_value_rate(10_000, 0.2) > 1.0
    assert "n*h^7" in caplog.text


@pytest.mark.parametrize(
    "spec",
    (BenchmarkSpec.initial_value(), BenchmarkSpec.partial_mean(0.3), BenchmarkSpec.full_mean()),
)
def test_benchmarks_are_shift_equivariant(quartic, spec):
    series = series_from(lambda x: np.cos(2 * x), 400, "iid", seed=12)
    shifted = TimeSeries(series.values + 5.0)
    base = estimate_benchmark(spec, series, quartic, 0.02)
    assert estimate_benchmark(spec, shifted, quartic, 0.02) == pytest.approx(base + 5.0, abs=1e-12)
