# The end-to-end relevant deviation pipeline
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import csv
import dataclasses
import datetime
import logging
from typing import Optional, Sequence, Union

import numpy as np

from .benchmarks import BenchmarkSpec, estimate_benchmark
from .changetime import FirstExceedance, default_delta_n, first_exceedance, to_epoch
from .config import RunConfig
from .exceptions import ConfigError
from .deviation import (
    DeviationCurve,
    ExtremalSet,
    default_rho,
    deviation_curve,
    estimate_extremal_set,
    scaling_ell,
)
from .ingest import ingest_csv
from .kernels import KernelSpec, get_kernel
from .locstat import (
    LocalLrvCurve,
    check_ls_rates,
    default_ls_smoothing,
    local_lrv_curve,
    ls_test,
    standardized_benchmark,
    standardized_deviation,
)
from .smoothing import (
    CVResult,
    SmoothCurve,
    TimeSeries,
    cross_validate,
    fitted_values,
    jackknife_curve,
)
from .testing import TestConfig, TestOutcome, band_halfwidth, run_test
from .util import ReportDict
from .variance import LrvEstimate, block_length_rule, lrv_estimate

__all__ = [
    "Analysis",
    "analyze",
    "decide",
    "load_series",
    "run_pipeline",
    "scan_deltas",
]

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class Analysis:
    """Every estimate the tests are computed from."""

    series: TimeSeries
    kernel: KernelSpec
    benchmark: BenchmarkSpec
    curve: SmoothCurve
    g_hat: float
    deviation: DeviationCurve
    sigma_hat: float
    rho: float
    eset: ExtremalSet
    x0: float
    x1: float
    cv: Optional[CVResult] = None
    lrv: Optional[LrvEstimate] = None
    local_lrv: Optional[LocalLrvCurve] = None

    @property
    def bandwidth(self) -> float:
        return self.curve.bandwidth

    @property
    def locally_stationary(self) -> bool:
        return self.local_lrv is not None

    def band(self, alpha: float, use_ell_prime: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Simultaneous band for the mean; pointwise rescaled by ``sigma_hat(t)``."""
        lo, hi = self.curve.interval
        measure = self.x1 - self.x0 if use_ell_prime else hi - lo
        n, h = self.series.n, self.bandwidth
        if self.local_lrv is not None:
            width = band_halfwidth(n, h, 1.0, self.kernel, alpha, measure)
            width = width * self.local_lrv.sigma
        else:
            width = band_halfwidth(n, h, self.sigma_hat, self.kernel, alpha, measure)
        return self.curve.values - width, self.curve.values + width


def _resolve_kernel(kernel: Union[str, KernelSpec, None]) -> KernelSpec:
    # Avoid a cyclic import.
    import reldev

    if isinstance(kernel, KernelSpec):
        return kernel
    return get_kernel(kernel or reldev.DEFAULT_KERNEL)


def analyze(
    series: TimeSeries,
    benchmark: BenchmarkSpec,
    kernel: Union[str, KernelSpec, None] = None,
    x0: float = 0.0,
    x1: float = 1.0,
    bandwidth: Optional[float] = None,
    folds: Optional[int] = None,
    seed=None,
    contiguous_folds: bool = False,
    thin_cv: bool = False,
    cv_gap: Optional[int] = None,
    refine: int = 1,
    block_length: Optional[int] = None,
    locally_stationary: bool = False,
    tau: Optional[float] = None,
    m: Optional[int] = None,
) -> Analysis:
    """Fit the curve, estimate benchmark and variance, and locate the extremal set.

    ``bandwidth=None`` runs cross-validation with ``folds`` folds seeded by
    ``seed``; ``cv_gap`` is passed on to
    :func:`reldev.smoothing.cross_validate`.  With ``locally_stationary``
    the deviation is standardized by the local long-run variance; ``tau``
    and ``m`` default to :func:`reldev.locstat.default_ls_smoothing`.
    """
    # Avoid a cyclic import.
    import reldev

    k = _resolve_kernel(kernel)
    series.require()
    cv = None
    if bandwidth is None:
        cv = cross_validate(
            series,
            k,
            folds=folds or reldev.DEFAULT_FOLDS,
            seed=seed,
            contiguous=contiguous_folds,
            thin=thin_cv,
            gap=cv_gap,
        )
        bandwidth = cv.bandwidth
    curve = jackknife_curve(series, k, bandwidth, x0=x0, x1=x1, refine=refine)
    n = series.n

    lrv = None
    local = None
    if locally_stationary:
        if tau is None or m is None:
            default_tau, default_m = default_ls_smoothing(n, bandwidth)
            tau = default_tau if tau is None else tau
            m = default_m if m is None else m
        check_ls_rates(n, bandwidth, tau, m)
        local = local_lrv_curve(series, k, tau, m, grid=curve.grid)
        g_hat = standardized_benchmark(benchmark, series, k, bandwidth, tau, m)
        dev = standardized_deviation(curve, local, g_hat)
        sigma_hat = 1.0
    else:
        g_hat = estimate_benchmark(benchmark, series, k, bandwidth)
        dev = deviation_curve(curve, g_hat)
        if block_length is None:
            block_length = block_length_rule(series.values - fitted_values(series, k, bandwidth))
        lrv = lrv_estimate(series, block_length)
        sigma_hat = lrv.sigma

    ell = scaling_ell(x1 - x0, bandwidth, k.lambda_k)
    rho = default_rho(n, bandwidth, ell)
    eset = estimate_extremal_set(dev, rho)
    log.info(
        "h=%.4g g_hat=%.6g sigma_hat=%.4g sup=%.4g extremal measure=%.4g",
        bandwidth,
        g_hat,
        sigma_hat,
        dev.sup,
        eset.measure,
    )
    return Analysis(
        series=series,
        kernel=k,
        benchmark=benchmark,
        curve=curve,
        g_hat=g_hat,
        deviation=dev,
        sigma_hat=sigma_hat,
        rho=rho,
        eset=eset,
        x0=x0,
        x1=x1,
        cv=cv,
        lrv=lrv,
        local_lrv=local,
    )


def decide(analysis: Analysis, cfg: TestConfig) -> TestOutcome:
    """Run the test selected by ``cfg`` on an :class:`Analysis`."""
    if analysis.locally_stationary:
        return ls_test(analysis.deviation, analysis.eset, analysis.kernel, cfg)
    return run_test(analysis.deviation, analysis.eset, analysis.sigma_hat, analysis.kernel, cfg)


def load_series(cfg: RunConfig) -> TimeSeries:
    if cfg.series is not None:
        return cfg.series
    if cfg.scenario is not None:
        # Avoid a cyclic import.
        from .simulation.runner import generate

        return generate(cfg.scenario, cfg.seed)
    return ingest_csv(cfg.input)  # type: ignore[arg-type]


def _margin(analysis: Analysis, cfg: RunConfig) -> float:
    if cfg.delta_n is not None:
        return cfg.delta_n
    n, h = analysis.series.n, analysis.bandwidth
    delta_n = default_delta_n(
        analysis.sigma_hat,
        analysis.kernel,
        n,
        h,
        c=cfg.delta_n_constant,
        measure=cfg.x1 - cfg.x0,
    )
    floor, cap = 1e-6 * cfg.delta, 0.5 * cfg.delta
    if delta_n > cap:
        log.warning("default margin %.4g exceeds delta/2; using %.4g", delta_n, cap)
        return cap
    return max(delta_n, floor)


def _first_change(analysis: Analysis, cfg: RunConfig) -> Optional[FirstExceedance]:
    if not cfg.first_change or cfg.delta <= 0:
        return None
    return first_exceedance(analysis.deviation, cfg.delta, _margin(analysis, cfg))


def _write_band(path: str, grid, values, lower, upper) -> None:
    with open(path, "w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(["t", "mu_tilde", "lower", "upper"])
        for row in zip(grid, values, lower, upper):
            writer.writerow([repr(float(v)) for v in row])


def _analyze_run(series: TimeSeries, cfg: RunConfig) -> Analysis:
    return analyze(
        series,
        cfg.benchmark,
        kernel=cfg.kernel,
        x0=cfg.x0,
        x1=cfg.x1,
        bandwidth=cfg.bandwidth,
        folds=cfg.folds,
        seed=cfg.seed,
        contiguous_folds=cfg.contiguous_folds,
        thin_cv=cfg.thin_cv,
        cv_gap=cfg.cv_gap,
        refine=cfg.refine,
        block_length=cfg.block_length,
        locally_stationary=cfg.locally_stationary,
        tau=cfg.tau,
        m=cfg.m,
    )


def run_pipeline(cfg: RunConfig) -> ReportDict:
    """Run the full analysis described by ``cfg`` and return its report.

    The report is written as JSON to ``cfg.output`` and the band as CSV to
    ``cfg.band_output`` when those are set.
    """
    series = load_series(cfg)
    analysis = _analyze_run(series, cfg)
    outcome = decide(analysis, cfg.test_config())
    lower, upper = analysis.band(cfg.alpha, cfg.use_ell_prime)  # type: ignore[arg-type]

    report = ReportDict(
        n=series.n,
        kernel=analysis.kernel.name,
        benchmark=str(cfg.benchmark),
        g_hat=analysis.g_hat,
        bandwidth=analysis.bandwidth,
        interval=list(analysis.curve.interval),
        locally_stationary=analysis.locally_stationary,
        sup_deviation=analysis.deviation.sup,
        argmax_sign=analysis.deviation.argmax_sign,
        rho=analysis.rho,
        extremal_set=ReportDict(
            intervals=analysis.eset.as_pairs(),
            measure=analysis.eset.measure,
            plus=[list(pair) for pair in analysis.eset.plus],
            minus=[list(pair) for pair in analysis.eset.minus],
        ),
        test=ReportDict(outcome.as_dict()),
        created=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
    if analysis.cv is not None:
        report["cv_trace"] = analysis.cv.trace()
        report["cv_gap"] = analysis.cv.gap
    if analysis.lrv is not None:
        report["sigma_hat"] = analysis.sigma_hat
        report["block_length"] = analysis.lrv.block_length
    if analysis.local_lrv is not None:
        local = analysis.local_lrv
        report["local_lrv"] = ReportDict(
            tau=local.tau,
            m=local.m,
            min=float(local.values.min()),
            max=float(local.values.max()),
            mean=float(local.values.mean()),
            boundary_lo=local.boundary_lo,
            boundary_hi=local.boundary_hi,
        )

    change = _first_change(analysis, cfg)
    if change is not None:
        entry = ReportDict(
            t_star_hat=change.t_star_hat,
            delta_n=change.delta_n,
            threshold=change.threshold_used,
        )
        if cfg.epoch_start is not None:
            entry["epoch"] = to_epoch(
                change.t_star_hat, series.n, cfg.epoch_start, cfg.epoch_per_unit
            )
        report["first_change"] = entry

    if cfg.band_output:
        _write_band(cfg.band_output, analysis.curve.grid, analysis.curve.values, lower, upper)
        report["band_csv"] = cfg.band_output
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as file:
            file.write(report.to_json())
            file.write("\n")
    log.info(
        "%s test: statistic %.4g, threshold %.4g, reject=%s",
        outcome.variant.value,
        outcome.statistic,
        outcome.threshold,
        outcome.reject,
    )
    return report


def scan_deltas(cfg: RunConfig, deltas: Sequence[float]) -> ReportDict:
    """Test one series against several margins, reusing a single analysis.

    The curve, benchmark, variance and extremal set are estimated once; the
    test and the first change time are then computed for every value in
    ``deltas``.  Each entry of the returned ``deltas`` list holds the
    margin, the p-value and decision and, for positive margins, the first
    change time (``inf`` when the deviation never exceeds the margin).
    """
    if not deltas:
        raise ConfigError("at least one delta is needed")
    series = load_series(cfg)
    analysis = _analyze_run(series, cfg)
    entries = []
    for delta in deltas:
        run = dataclasses.replace(cfg, delta=float(delta))
        outcome = decide(analysis, run.test_config())
        entry = ReportDict(
            delta=run.delta,
            p_value=outcome.p_value,
            reject=outcome.reject,
            threshold=outcome.threshold,
        )
        change = _first_change(analysis, run)
        if change is not None:
            entry["t_star_hat"] = change.t_star_hat
            if cfg.epoch_start is not None:
                entry["epoch"] = to_epoch(
                    change.t_star_hat, series.n, cfg.epoch_start, cfg.epoch_per_unit
                )
        entries.append(entry)
        log.debug("delta=%.4g p=%.4g", run.delta, outcome.p_value)
    return ReportDict(
        n=series.n,
        variant=cfg.variant.value,
        bandwidth=analysis.bandwidth,
        g_hat=analysis.g_hat,
        sup_deviation=analysis.deviation.sup,
        deltas=entries,
    )
