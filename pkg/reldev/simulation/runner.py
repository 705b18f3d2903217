# Monte Carlo experiments: rejection rates of the relevant deviation tests
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""Repeated simulation of a :class:`Scenario` through the full pipeline.

Run ``r`` of an experiment with master seed ``s`` uses the ``r``-th child
of ``numpy.random.SeedSequence(s)``; that child is split again into the
streams for the data, the cross-validation folds and the quantile
simulation.  Results therefore do not depend on the number of worker
processes or on the order in which runs finish.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import multiprocessing
from typing import Optional

import numpy as np
from scipy import integrate
from tqdm import tqdm

from ..api import analyze, decide
from ..benchmarks import BenchmarkKind, BenchmarkSpec
from ..exceptions import RelDevError
from ..smoothing import TimeSeries
from ..testing import TestConfig, Variant
from . import get_error_process
from .means import MeanFunction, Mu1, Mu2

__all__ = [
    "Scenario",
    "MCResult",
    "generate",
    "run_once",
    "run_mc",
    "table_scenarios",
    "run_table",
    "TABLE_PARAMETERS",
    "PANELS",
]

log = logging.getLogger(__name__)

# Grid resolution used to evaluate the true supremum of a mean function.
TRUE_SUP_POINTS = 200_001

PANELS = {"A": "iid", "B": "ma", "C": "ar"}

TABLE_PARAMETERS = {
    1: (1.0, 1.5, 128.0 / 81.0, 2.0, 2.5, 3.0),
    2: (1.0, 1.5, 1.75, 2.0, 2.25),
}

# Column order of run_table rows.
TABLE_VARIANTS = (
    Variant.BAND,
    Variant.GUMBEL_SIMPLE,
    Variant.SIMULATED_QUANTILE,
    Variant.GUMBEL_EXTREMAL,
)


@dataclasses.dataclass(frozen=True)
class Scenario:
    """A data-generating process together with the test applied to it."""

    mean: MeanFunction
    errors: str = "iid"
    n: int = 500
    delta: float = 1.0
    x0: float = 0.0
    x1: float = 1.0
    benchmark: BenchmarkSpec = dataclasses.field(
        default_factory=lambda: BenchmarkSpec.constant(10.0)
    )
    variant: Variant = Variant.SIMULATED_QUANTILE
    alpha: float = 0.05
    seed: Optional[int] = None
    kernel: str = "quartic"
    quantile_reps: int = 2000
    folds: int = 10
    thin_cv: bool = False
    cv_gap: Optional[int] = None
    noise_scale: float = 1.0
    locally_stationary: bool = False

    def __post_init__(self):
        if self.n < 20:
            raise ValueError(f"scenarios need n >= 20, got {self.n}")
        get_error_process(self.errors)
        object.__setattr__(self, "variant", Variant(self.variant))

    def test_config(self, seed=None) -> TestConfig:
        return TestConfig(
            delta=self.delta,
            alpha=self.alpha,
            variant=self.variant,
            x0=self.x0,
            x1=self.x1,
            quantile_reps=self.quantile_reps,
            seed=seed,
        )

    def true_benchmark(self) -> float:
        """``g(mu)`` of the scenario's mean function."""
        kind = self.benchmark.kind
        if kind is BenchmarkKind.CONSTANT:
            return float(self.benchmark.c)  # type: ignore[arg-type]
        if kind is BenchmarkKind.INITIAL_VALUE:
            return float(self.mean(0.0))
        if kind is BenchmarkKind.FULL_MEAN:
            upper = 1.0
        else:
            upper = float(self.benchmark.x0)  # type: ignore[arg-type]
        value, _ = integrate.quad(lambda x: float(self.mean(x)), 0.0, upper, limit=200)
        return value / upper

    def true_sup_deviation(self) -> float:
        """``sup |mu(t) - g(mu)|`` over ``[x0, x1]`` on a fine grid."""
        grid = np.linspace(self.x0, self.x1, TRUE_SUP_POINTS)
        return float(np.max(np.abs(self.mean(grid) - self.true_benchmark())))

    def describe(self) -> dict:
        return {
            "mean": self.mean.describe(),
            "errors": self.errors,
            "n": self.n,
            "delta": self.delta,
            "x0": self.x0,
            "x1": self.x1,
            "benchmark": str(self.benchmark),
            "variant": self.variant.value,
            "alpha": self.alpha,
            "seed": self.seed,
        }


@dataclasses.dataclass(frozen=True)
class MCResult:
    scenario: dict
    rejection_rate: float
    runs: int
    se: float
    rates: dict
    failures: list

    @property
    def rejections(self) -> int:
        return int(round(self.rejection_rate * self.runs))


def generate(scenario: Scenario, seed=None) -> TimeSeries:
    """``X_i = mu(i/n) + noise_scale * e_i`` with the scenario's error process."""
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    design = np.arange(1, scenario.n + 1) / scenario.n
    noise = get_error_process(scenario.errors)(rng, scenario.n)
    return TimeSeries(scenario.mean(design) + scenario.noise_scale * noise)


def _int_seed(sequence: np.random.SeedSequence) -> int:
    return int(sequence.generate_state(1)[0])


def run_once(
    scenario: Scenario,
    sequence: np.random.SeedSequence,
    variants=TABLE_VARIANTS,
) -> dict:
    """One pipeline run; decisions of every variant in ``variants`` on the same data."""
    data_seq, cv_seq, quantile_seq = sequence.spawn(3)
    series = generate(scenario, data_seq)
    analysis = analyze(
        series,
        scenario.benchmark,
        kernel=scenario.kernel,
        x0=scenario.x0,
        x1=scenario.x1,
        folds=scenario.folds,
        seed=_int_seed(cv_seq),
        thin_cv=scenario.thin_cv,
        cv_gap=scenario.cv_gap,
        locally_stationary=scenario.locally_stationary,
    )
    cfg = scenario.test_config(seed=_int_seed(quantile_seq))
    return {
        variant.value: decide(analysis, cfg.replace(variant=variant)).reject
        for variant in variants
    }


def _run_one(args) -> tuple[Optional[dict], Optional[str]]:
    scenario, sequence, variants = args
    try:
        return run_once(scenario, sequence, variants), None
    except RelDevError as exception:
        return None, f"{type(exception).__name__}: {exception}"


def run_mc(
    scenario: Scenario,
    runs: int,
    seed=None,
    processes: Optional[int] = None,
    progress: bool = False,
    variants=None,
) -> MCResult:
    """Rejection rates over ``runs`` independent pipeline runs.

    A run raising a :class:`~reldev.exceptions.RelDevError` counts as a
    non-rejection for every variant and is listed in ``failures``.
    ``processes=1`` runs in the calling process.
    """
    if runs < 1:
        raise ValueError(f"runs must be at least 1, got {runs}")
    if variants is None:
        variants = tuple(dict.fromkeys((scenario.variant,) + TABLE_VARIANTS))
    master = scenario.seed if seed is None else seed
    children = np.random.SeedSequence(master).spawn(runs)
    jobs = [(scenario, child, variants) for child in children]

    if processes == 1 or runs == 1:
        results = list(tqdm(map(_run_one, jobs), total=runs, disable=not progress))
    else:
        with multiprocessing.Pool(processes) as pool:
            results = list(
                tqdm(
                    pool.imap(_run_one, jobs, chunksize=max(1, runs // 64)),
                    total=runs,
                    disable=not progress,
                )
            )

    counts = {variant.value: 0 for variant in variants}
    failures = []
    for index, (decisions, failure) in enumerate(results):
        if decisions is None:
            failures.append({"run": index, "error": failure})
            continue
        for name, reject in decisions.items():
            counts[name] += int(reject)
    if failures:
        log.warning("%d of %d runs failed and count as non-rejections", len(failures), runs)

    rates = {name: count / runs for name, count in counts.items()}
    rate = rates[scenario.variant.value]
    return MCResult(
        scenario=scenario.describe(),
        rejection_rate=rate,
        runs=runs,
        se=math.sqrt(rate * (1.0 - rate) / runs),
        rates=rates,
        failures=failures,
    )


def table_scenarios(table: int, panel: str, n: int, **options) -> list[tuple[float, Scenario]]:
    """The rows of the two standard experiments as ``(parameter, scenario)`` pairs.

    ``table=1`` varies ``a`` in ``mu1`` against the mean over ``[0, 1/4]`` with
    ``delta = 1`` on ``[1/4, 1]``; ``table=2`` varies ``delta`` for ``mu2``
    against the target 10 on ``[0, 1]``.
    """
    try:
        errors = PANELS[panel.upper()]
    except KeyError:
        raise ValueError(f"panel must be one of {', '.join(PANELS)}, got {panel!r}")
    if table == 1:
        return [
            (
                a,
                Scenario(
                    mean=Mu1(a),
                    errors=errors,
                    n=n,
                    delta=1.0,
                    x0=0.25,
                    x1=1.0,
                    benchmark=BenchmarkSpec.partial_mean(0.25),
                    **options,
                ),
            )
            for a in TABLE_PARAMETERS[1]
        ]
    if table == 2:
        return [
            (
                delta,
                Scenario(
                    mean=Mu2(),
                    errors=errors,
                    n=n,
                    delta=delta,
                    x0=0.0,
                    x1=1.0,
                    benchmark=BenchmarkSpec.constant(10.0),
                    **options,
                ),
            )
            for delta in TABLE_PARAMETERS[2]
        ]
    raise ValueError(f"table must be 1 or 2, got {table!r}")


def run_table(
    table: int,
    panel: str,
    n: int,
    runs: int,
    seed=None,
    processes: Optional[int] = None,
    progress: bool = False,
    **options,
) -> list[dict]:
    """Rejection rates of every test for each row of ``table``.

    Rows carry ``parameter``, ``d_inf_minus_delta`` and one ``rate_*`` column
    per test, all tests evaluated on the same simulated data.
    """
    rows = []
    for parameter, scenario in table_scenarios(table, panel, n, **options):
        result = run_mc(scenario, runs, seed=seed, processes=processes, progress=progress)
        rows.append(
            {
                "parameter": parameter,
                "d_inf_minus_delta": scenario.true_sup_deviation() - scenario.delta,
                "rate_band": result.rates[Variant.BAND.value],
                "rate_simple": result.rates[Variant.GUMBEL_SIMPLE.value],
                "rate_simulated": result.rates[Variant.SIMULATED_QUANTILE.value],
                "rate_extremal": result.rates[Variant.GUMBEL_EXTREMAL.value],
                "failures": len(result.failures),
            }
        )
    return rows
