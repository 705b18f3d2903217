import dataclasses
import math

import numpy as np
import pytest

import reldev
from reldev.api import analyze, decide
from reldev.benchmarks import BenchmarkSpec
from reldev.deviation import DeviationCurve, estimate_extremal_set, scaling_ell
from reldev.exceptions import InvalidProbability
from reldev.simulation import ConstantMean
from reldev.simulation.runner import Scenario, run_mc
from reldev.smoothing import SmoothCurve, TimeSeries
from reldev.testing import (
    QuantileSource,
    TestConfig,
    Variant,
    band_halfwidth,
    conf_band_test,
    confidence_band,
    empirical_quantile,
    gumbel_extremal_test,
    gumbel_quantile,
    gumbel_simple_test,
    p_value,
    run_test,
    simulate_gn,
    simulate_gn_quantile,
    simulated_quantile_test,
)

from .helpers import flat_deviation, series_from

SIGMA = 0.5


def _scale(k, n=500, h=0.1):
    return SIGMA * k.l2_norm_kstar / math.sqrt(n * h)


def test_gumbel_quantile():
    assert gumbel_quantile(math.log(2.0), 0.95) == pytest.approx(3.663342, abs=1e-6)
    assert gumbel_quantile(0.0, 0.95) == pytest.approx(-math.log(-math.log(0.95)))
    with pytest.raises(InvalidProbability):
        gumbel_quantile(0.0, 1.0)


def test_config_defaults():
    cfg = TestConfig(delta=1.0)
    assert cfg.alpha == reldev.DEFAULT_ALPHA
    assert cfg.quantile_reps == reldev.DEFAULT_QUANTILE_REPS
    assert cfg.variant is Variant.SIMULATED_QUANTILE
    assert TestConfig(variant="band").variant is Variant.BAND
    assert cfg.replace(alpha=0.1).alpha == 0.1


@pytest.mark.parametrize(
    "options, error",
    (
        ({"alpha": 0.0}, InvalidProbability),
        ({"alpha": 1.5}, InvalidProbability),
        ({"delta": -1.0}, ValueError),
        ({"delta": math.inf}, ValueError),
        ({"x0": 0.5, "x1": 0.5}, ValueError),
        ({"x1": 1.2}, ValueError),
        ({"quantile_reps": 99}, ValueError),
        ({"variant": "bogus"}, ValueError),
    ),
)
def test_config_validation(options, error):
    with pytest.raises(error):
        TestConfig(**options)


def test_band_threshold(quartic):
    dev = flat_deviation(1.2)
    outcome = conf_band_test(dev, SIGMA, quartic, TestConfig(delta=1.0))
    ell = scaling_ell(1.0, 0.1, quartic.lambda_k)
    q = gumbel_quantile(math.log(2.0), 0.95)
    assert outcome.ell_used == pytest.approx(ell)
    assert outcome.threshold == pytest.approx(1.0 + (q + ell * ell) * _scale(quartic) / ell)
    assert outcome.statistic == 1.2
    assert outcome.reject is (1.2 > outcome.threshold)
    assert outcome.quantile_source is QuantileSource.GUMBEL_CLOSED_FORM
    assert outcome.variant is Variant.BAND


def test_interval_length_instead_of_ell_prime(quartic):
    dev = flat_deviation(1.2)
    cfg = TestConfig(delta=1.0, use_ell_prime=False)
    outcome = conf_band_test(dev, SIGMA, quartic, cfg)
    assert outcome.ell_used == pytest.approx(scaling_ell(0.8, 0.1, quartic.lambda_k))


def test_gumbel_simple_location(quartic):
    dev = flat_deviation(0.3)
    relevant = gumbel_simple_test(dev, SIGMA, quartic, TestConfig(delta=0.25))
    classical = gumbel_simple_test(dev, SIGMA, quartic, TestConfig(delta=0.0))
    assert relevant.quantile == pytest.approx(gumbel_quantile(0.0, 0.95))
    assert classical.quantile == pytest.approx(gumbel_quantile(math.log(2.0), 0.95))


def test_extremal_test_uses_the_set_measure(quartic):
    grid = np.linspace(0.1, 0.9, 161)
    values = np.where(np.abs(grid - 0.5) < 0.05, 1.5, 0.2)
    dev = DeviationCurve.from_values(grid, values, bandwidth=0.1, n=500)
    eset = estimate_extremal_set(dev, 0.1)
    outcome = gumbel_extremal_test(dev, eset, SIGMA, quartic, TestConfig(delta=1.0))
    assert outcome.extremal_measure == pytest.approx(eset.measure)
    assert eset.measure < 0.15
    assert outcome.ell_used == pytest.approx(scaling_ell(eset.measure, 0.1, quartic.lambda_k))
    assert outcome.variant is Variant.GUMBEL_EXTREMAL
    empty = dataclasses.replace(eset, measure=0.0)
    with pytest.raises(ValueError):
        gumbel_extremal_test(dev, empty, SIGMA, quartic, TestConfig(delta=1.0))


@pytest.mark.parametrize("test", (conf_band_test, gumbel_simple_test))
def test_closed_form_p_value_matches_decision(quartic, test):
    cfg = TestConfig(delta=1.0)
    for level in (0.9, 1.05, 1.1, 1.2, 1.4, 2.0):
        outcome = test(flat_deviation(level), SIGMA, quartic, cfg)
        assert outcome.reject is (outcome.p_value < cfg.alpha)
        assert p_value(outcome) == pytest.approx(outcome.p_value)


def test_closed_form_p_value_at_threshold(quartic):
    cfg = TestConfig(delta=1.0)
    first = conf_band_test(flat_deviation(1.0), SIGMA, quartic, cfg)
    at = conf_band_test(flat_deviation(first.threshold), SIGMA, quartic, cfg)
    assert at.p_value == pytest.approx(cfg.alpha, rel=1e-9)
    assert not at.reject


def test_zero_variance_decides_on_the_margin(quartic):
    cfg = TestConfig(delta=1.0)
    below = conf_band_test(flat_deviation(0.5), 0.0, quartic, cfg)
    above = conf_band_test(flat_deviation(1.5), 0.0, quartic, cfg)
    assert below.threshold == above.threshold == 1.0
    assert (below.reject, below.p_value) == (False, 1.0)
    assert (above.reject, above.p_value) == (True, 0.0)
    with pytest.raises(ValueError):
        conf_band_test(flat_deviation(0.5), -1.0, quartic, cfg)


def _flat_set(level=1.2):
    dev = flat_deviation(level)
    return dev, estimate_extremal_set(dev, 0.1)


def test_simulate_gn_is_reproducible(quartic):
    _, eset = _flat_set()
    first = simulate_gn(eset, 500, 0.1, quartic, 1, 200, seed=3)
    again = simulate_gn(eset, 500, 0.1, quartic, 1, 200, seed=3)
    head = simulate_gn(eset, 500, 0.1, quartic, 1, 100, seed=3)
    assert first.shape == (200,)
    np.testing.assert_array_equal(first, again)
    np.testing.assert_array_equal(first[:100], head)


def test_two_sided_replicates_dominate(quartic):
    _, eset = _flat_set()
    one = simulate_gn(eset, 500, 0.1, quartic, 1, 100, seed=8)
    two = simulate_gn(eset, 500, 0.1, quartic, 2, 100, seed=8)
    assert np.all(two >= one)


def test_simulate_gn_arguments(quartic):
    _, eset = _flat_set()
    with pytest.raises(ValueError):
        simulate_gn(eset, 500, 0.1, quartic, 3, 100)
    with pytest.raises(ValueError):
        simulate_gn(eset, 500, 0.1, quartic, 1, 10)


def test_empirical_quantile():
    replicates = np.arange(100, 0, -1, dtype=float)
    assert empirical_quantile(replicates, 0.05) == 95.0
    assert empirical_quantile(replicates, 0.5) == 50.0
    with pytest.raises(InvalidProbability):
        empirical_quantile(replicates, 0.0)


@pytest.mark.parametrize(
    "delta, source",
    ((0.0, QuantileSource.SIMULATED_GN2), (1.0, QuantileSource.SIMULATED_GN1)),
)
def test_simulated_test_quantile_source(quartic, delta, source):
    dev, eset = _flat_set()
    cfg = TestConfig(delta=delta, quantile_reps=200, seed=1)
    outcome = simulated_quantile_test(dev, eset, SIGMA, quartic, cfg)
    assert outcome.quantile_source is source
    assert outcome.replicates.size == 200
    assert outcome.extremal_measure == pytest.approx(0.8)
    j = 2 if delta == 0 else 1
    q = simulate_gn_quantile(eset, 500, 0.1, quartic, j, 200, seed=1, alpha=0.05)
    assert outcome.quantile == q


def test_simulated_p_value_at_threshold(quartic):
    dev, eset = _flat_set()
    reps = 400
    cfg = TestConfig(delta=1.0, quantile_reps=reps, seed=2)
    first = simulated_quantile_test(dev, eset, SIGMA, quartic, cfg)
    at_dev, at_set = _flat_set(first.threshold)
    at = simulated_quantile_test(at_dev, at_set, SIGMA, quartic, cfg)
    assert not at.reject
    assert abs(at.p_value - cfg.alpha) <= 1.5 / reps


def test_simulated_p_value_resolution(quartic):
    dev, eset = _flat_set(50.0)
    cfg = TestConfig(delta=1.0, quantile_reps=100, seed=0)
    outcome = simulated_quantile_test(dev, eset, SIGMA, quartic, cfg)
    assert outcome.reject
    assert outcome.p_value == 1.0 / 200


def test_simulated_p_value_matches_decision(quartic):
    cfg = TestConfig(delta=1.0, quantile_reps=200, seed=4)
    for level in (0.9, 1.1, 1.2, 1.3, 2.0):
        dev, eset = _flat_set(level)
        outcome = simulated_quantile_test(dev, eset, SIGMA, quartic, cfg)
        if outcome.reject:
            assert outcome.p_value <= cfg.alpha
        else:
            assert outcome.p_value >= cfg.alpha


def test_run_test_dispatch(quartic):
    dev, eset = _flat_set()
    for variant in Variant:
        cfg = TestConfig(delta=1.0, variant=variant, quantile_reps=100, seed=0)
        assert run_test(dev, eset, SIGMA, quartic, cfg).variant is variant
    with pytest.raises(ValueError, match="extremal set"):
        run_test(dev, None, SIGMA, quartic, TestConfig(delta=1.0, variant="gumbel-extremal"))
    outcome = run_test(dev, None, SIGMA, quartic, TestConfig(delta=1.0, variant="band"))
    assert outcome.as_dict()["variant"] == "band"


def test_outcome_as_dict(quartic):
    dev, eset = _flat_set()
    outcome = run_test(dev, eset, SIGMA, quartic, TestConfig(delta=1.0, quantile_reps=100))
    data = outcome.as_dict()
    assert data["quantile_source"] == "simulated-gn1"
    assert data["sigma_hat"] == SIGMA
    assert "replicates" not in data


def test_confidence_band(quartic):
    grid = np.linspace(0.1, 0.9, 81)
    curve = SmoothCurve(grid=grid, values=np.sin(grid), bandwidth=0.1, interval=(0.1, 0.9), n=500)
    lower, upper = confidence_band(curve, SIGMA, quartic)
    width = band_halfwidth(500, 0.1, SIGMA, quartic, 0.05, 1.0)
    np.testing.assert_allclose(upper - curve.values, width)
    np.testing.assert_allclose(curve.values - lower, width)
    narrower, _ = confidence_band(curve, SIGMA, quartic, alpha=0.2)
    assert np.all(narrower > lower)


def test_band_and_band_test_agree(quartic):
    # The band test rejects exactly when the band around d_hat misses [-delta, delta].
    cfg = TestConfig(delta=1.0)
    dev = flat_deviation(1.3)
    outcome = conf_band_test(dev, SIGMA, quartic, cfg)
    width = band_halfwidth(500, 0.1, SIGMA, quartic, cfg.alpha, 1.0)
    assert outcome.reject is (dev.sup - width > cfg.delta)


@pytest.mark.slow
def test_two_sided_quantile_near_its_gumbel_limit(quartic):
    n, h = 2000, 0.05
    grid = np.arange(int(n * h), int(n * (1 - h)) + 1) / n
    dev = DeviationCurve.from_values(grid, np.zeros(grid.size), bandwidth=h, n=n)
    eset = estimate_extremal_set(dev, 1.0)
    q = simulate_gn_quantile(eset, n, h, quartic, 2, 2000, seed=0)
    assert abs(q - gumbel_quantile(math.log(2.0), 0.95)) < 0.8


def _bumpy_deviation():
    grid = np.linspace(0.1, 0.9, 161)
    values = 1.2 * np.sin(3.0 * np.pi * grid) + 0.1 * np.cos(17.0 * grid)
    return DeviationCurve.from_values(grid, values, bandwidth=0.1, n=500)


@pytest.mark.parametrize("variant", list(Variant))
def test_threshold_grows_with_delta(quartic, variant):
    dev = _bumpy_deviation()
    eset = estimate_extremal_set(dev, 0.05)
    thresholds, rejections = [], []
    for delta in (0.25, 0.5, 1.0, 1.5, 2.0):
        cfg = TestConfig(delta=delta, variant=variant, quantile_reps=200, seed=1)
        outcome = run_test(dev, eset, SIGMA, quartic, cfg)
        thresholds.append(outcome.threshold)
        rejections.append(outcome.reject)
    assert thresholds == sorted(thresholds)
    assert rejections == sorted(rejections, reverse=True)


@pytest.mark.parametrize("variant", list(Variant))
def test_threshold_shrinks_with_alpha(quartic, variant):
    dev = _bumpy_deviation()
    eset = estimate_extremal_set(dev, 0.05)
    thresholds, rejections = [], []
    for alpha in (0.01, 0.05, 0.1, 0.2):
        cfg = TestConfig(delta=1.0, alpha=alpha, variant=variant, quantile_reps=200, seed=1)
        outcome = run_test(dev, eset, SIGMA, quartic, cfg)
        thresholds.append(outcome.threshold)
        rejections.append(outcome.reject)
    assert thresholds == sorted(thresholds, reverse=True)
    assert rejections == sorted(rejections)


@pytest.mark.parametrize("test", (gumbel_simple_test, gumbel_extremal_test))
def test_location_jumps_when_delta_leaves_zero(quartic, test):
    dev = _bumpy_deviation()
    eset = estimate_extremal_set(dev, 0.05)

    def outcome(delta):
        cfg = TestConfig(delta=delta)
        if test is gumbel_simple_test:
            return test(dev, SIGMA, quartic, cfg)
        return test(dev, eset, SIGMA, quartic, cfg)

    classical, relevant = outcome(0.0), outcome(1e-9)
    jump = math.log(2.0) * classical.scale / classical.ell_used
    assert classical.threshold - relevant.threshold == pytest.approx(jump - 1e-9, rel=1e-9)


@pytest.mark.parametrize("variant", list(Variant))
def test_decision_is_scale_equivariant(quartic, variant):
    dev = _bumpy_deviation()
    eset = estimate_extremal_set(dev, 0.05)
    factor = 3.5
    stretched = DeviationCurve.from_values(
        dev.grid, factor * dev.values, bandwidth=0.1, n=500, interval=dev.interval
    )
    for delta in (0.5, 1.0, 1.3):
        cfg = TestConfig(delta=delta, variant=variant, quantile_reps=200, seed=4)
        base = run_test(dev, eset, SIGMA, quartic, cfg)
        scaled = run_test(
            stretched, eset, factor * SIGMA, quartic, cfg.replace(delta=factor * delta)
        )
        assert scaled.statistic == pytest.approx(factor * base.statistic)
        assert scaled.threshold == pytest.approx(factor * base.threshold)
        assert scaled.reject is base.reject


@pytest.mark.parametrize("variant", (Variant.BAND, Variant.GUMBEL_SIMPLE))
def test_pipeline_decision_is_scale_equivariant(variant):
    series = series_from(lambda x: 10.0 + 2.0 * np.sin(2 * np.pi * x), 500, "iid", seed=6)
    outcomes = []
    for factor in (1.0, 4.0):
        analysis = analyze(
            TimeSeries(factor * series.values),
            BenchmarkSpec.constant(10.0 * factor),
            bandwidth=0.08,
        )
        cfg = TestConfig(delta=1.8 * factor, variant=variant)
        outcomes.append(decide(analysis, cfg))
    base, scaled = outcomes
    assert scaled.sigma_hat == pytest.approx(4.0 * base.sigma_hat)
    assert scaled.statistic == pytest.approx(4.0 * base.statistic)
    assert scaled.threshold == pytest.approx(4.0 * base.threshold)
    assert scaled.reject is base.reject


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore::DeprecationWarning")
def test_gumbel_simple_holds_its_level():
    scenario = Scenario(
        mean=ConstantMean(10.0),
        n=1000,
        delta=0.0,
        benchmark=BenchmarkSpec.constant(10.0),
        variant=Variant.GUMBEL_SIMPLE,
        seed=11,
    )
    runs = 1000
    result = run_mc(scenario, runs, variants=(Variant.GUMBEL_SIMPLE,))
    se = math.sqrt(0.05 * 0.95 / runs)
    assert result.rates[Variant.GUMBEL_SIMPLE.value] <= 0.05 + 3 * se
