# Tests of H0: sup |mu(t) - g(mu)| <= delta and the simultaneous confidence band
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""Decision rules for the hypothesis ``d_inf <= delta``.

All four procedures compare the supremum ``d_hat_inf`` of the deviation
curve with a threshold of the form::

    delta + (q + ell**2) * scale / ell,     scale = sigma_hat * ||K*||_2 / sqrt(n h)

They differ in the quantile ``q`` (closed-form Gumbel or simulated) and in
the set over which ``ell`` is computed (the whole analysis interval or the
estimated extremal set).  Every :class:`TestOutcome` keeps ``q``'s location,
``scale`` and ``ell`` so that its p-value can be recomputed from the outcome
alone.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from typing import Optional

import numpy as np
from scipy import sparse, stats

from .deviation import DeviationCurve, ExtremalSet, scaling_ell
from .exceptions import InvalidProbability
from .kernels import KernelSpec, kstar_eval
from .smoothing import SmoothCurve

__all__ = [
    "Variant",
    "QuantileSource",
    "TestConfig",
    "TestOutcome",
    "gumbel_quantile",
    "conf_band_test",
    "gumbel_simple_test",
    "gumbel_extremal_test",
    "simulate_gn",
    "simulate_gn_quantile",
    "empirical_quantile",
    "simulated_quantile_test",
    "p_value",
    "run_test",
    "band_halfwidth",
    "confidence_band",
]

log = logging.getLogger(__name__)

LOG2 = math.log(2.0)

MIN_QUANTILE_REPS = 100

# Upper bound on the number of normal draws held in memory at once.
_BATCH_ENTRIES = 4_000_000


class Variant(enum.Enum):
    BAND = "band"
    GUMBEL_SIMPLE = "gumbel-simple"
    GUMBEL_EXTREMAL = "gumbel-extremal"
    SIMULATED_QUANTILE = "simulated"


class QuantileSource(enum.Enum):
    GUMBEL_CLOSED_FORM = "gumbel"
    SIMULATED_GN1 = "simulated-gn1"
    SIMULATED_GN2 = "simulated-gn2"


def _check_probability(value: float, name: str) -> None:
    if not 0.0 < value < 1.0:
        raise InvalidProbability(f"{name} must lie in (0, 1), got {value!r}")


@dataclasses.dataclass(frozen=True)
class TestConfig:
    """Parameters shared by all test procedures.

    ``alpha`` and ``quantile_reps`` default to :data:`reldev.DEFAULT_ALPHA`
    and :data:`reldev.DEFAULT_QUANTILE_REPS`.
    """

    __test__ = False

    delta: float = 0.0
    alpha: Optional[float] = None
    variant: Variant = Variant.SIMULATED_QUANTILE
    x0: float = 0.0
    x1: float = 1.0
    use_ell_prime: bool = True
    quantile_reps: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        # Avoid a cyclic import.
        import reldev

        if self.alpha is None:
            object.__setattr__(self, "alpha", reldev.DEFAULT_ALPHA)
        if self.quantile_reps is None:
            object.__setattr__(self, "quantile_reps", reldev.DEFAULT_QUANTILE_REPS)
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.delta >= 0 or not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite and nonnegative, got {self.delta!r}")
        _check_probability(self.alpha, "alpha")
        if not 0.0 <= self.x0 < self.x1 <= 1.0:
            raise ValueError(f"need 0 <= x0 < x1 <= 1, got x0={self.x0}, x1={self.x1}")
        if self.quantile_reps < MIN_QUANTILE_REPS:
            raise ValueError(f"quantile_reps must be at least {MIN_QUANTILE_REPS}")

    def replace(self, **changes) -> "TestConfig":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True, eq=False)
class TestOutcome:
    __test__ = False

    statistic: float
    threshold: float
    reject: bool
    p_value: Optional[float]
    sigma_hat: float
    bandwidth: float
    ell_used: float
    extremal_measure: Optional[float]
    quantile_source: QuantileSource
    variant: Variant
    delta: float
    alpha: float
    location: float
    scale: float
    quantile: float
    replicates: Optional[np.ndarray] = dataclasses.field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "reject": self.reject,
            "p_value": self.p_value,
            "sigma_hat": self.sigma_hat,
            "bandwidth": self.bandwidth,
            "ell_used": self.ell_used,
            "extremal_measure": self.extremal_measure,
            "quantile_source": self.quantile_source.value,
            "quantile": self.quantile,
            "delta": self.delta,
            "alpha": self.alpha,
        }


def gumbel_quantile(a: float, beta: float) -> float:
    """Quantile of the Gumbel law ``exp(-exp(-(x - a)))`` at level ``beta``."""
    _check_probability(beta, "beta")
    return float(stats.gumbel_r.ppf(beta, loc=a))


def _scale(sigma_hat: float, k: KernelSpec, n: int, h: float) -> float:
    if not sigma_hat >= 0:
        raise ValueError(f"sigma_hat must be nonnegative, got {sigma_hat!r}")
    return sigma_hat * k.l2_norm_kstar / math.sqrt(n * h)


def _critical(q: float, ell: float, scale: float) -> float:
    return (q + ell * ell) * scale / ell


def _standardized(statistic: float, delta: float, ell: float, scale: float) -> float:
    """Invert the threshold: the largest ``q`` at which the test still rejects."""
    excess = statistic - delta
    if scale == 0.0:
        if excess > 0:
            return math.inf
        return -math.inf
    return excess * ell / scale - ell * ell


def _location(delta: float) -> float:
    return LOG2 if delta == 0 else 0.0


def _ell_interval(dev: DeviationCurve, k: KernelSpec, cfg: TestConfig) -> float:
    measure = cfg.x1 - cfg.x0 if cfg.use_ell_prime else dev.interval_length
    return scaling_ell(measure, dev.bandwidth, k.lambda_k)


def _closed_form_outcome(
    dev: DeviationCurve,
    sigma_hat: float,
    k: KernelSpec,
    cfg: TestConfig,
    variant: Variant,
    location: float,
    ell: float,
    extremal_measure: Optional[float],
) -> TestOutcome:
    scale = _scale(sigma_hat, k, dev.n, dev.bandwidth)
    q = gumbel_quantile(location, 1.0 - cfg.alpha)
    threshold = cfg.delta + _critical(q, ell, scale)
    z = _standardized(dev.sup, cfg.delta, ell, scale)
    return TestOutcome(
        statistic=dev.sup,
        threshold=threshold,
        reject=bool(dev.sup > threshold),
        p_value=float(stats.gumbel_r.sf(z, loc=location)),
        sigma_hat=sigma_hat,
        bandwidth=dev.bandwidth,
        ell_used=ell,
        extremal_measure=extremal_measure,
        quantile_source=QuantileSource.GUMBEL_CLOSED_FORM,
        variant=variant,
        delta=cfg.delta,
        alpha=cfg.alpha,
        location=location,
        scale=scale,
        quantile=q,
    )


def conf_band_test(
    dev: DeviationCurve, sigma_hat: float, k: KernelSpec, cfg: TestConfig
) -> TestOutcome:
    """Reject when ``d_hat_inf`` exceeds ``delta`` plus the band half-width."""
    ell = _ell_interval(dev, k, cfg)
    return _closed_form_outcome(
        dev, sigma_hat, k, cfg, Variant.BAND, LOG2, ell, dev.interval_length
    )


def gumbel_simple_test(
    dev: DeviationCurve, sigma_hat: float, k: KernelSpec, cfg: TestConfig
) -> TestOutcome:
    """Gumbel test with ``ell`` over the analysis interval.

    The quantile location is ``log 2`` for ``delta == 0`` and ``0`` otherwise.
    """
    ell = _ell_interval(dev, k, cfg)
    return _closed_form_outcome(
        dev,
        sigma_hat,
        k,
        cfg,
        Variant.GUMBEL_SIMPLE,
        _location(cfg.delta),
        ell,
        dev.interval_length,
    )


def gumbel_extremal_test(
    dev: DeviationCurve,
    eset: ExtremalSet,
    sigma_hat: float,
    k: KernelSpec,
    cfg: TestConfig,
) -> TestOutcome:
    """Gumbel test with ``ell`` computed over the estimated extremal set."""
    if not eset.measure > 0:
        raise ValueError("the extremal set must have positive measure")
    ell = scaling_ell(eset.measure, dev.bandwidth, k.lambda_k)
    return _closed_form_outcome(
        dev,
        sigma_hat,
        k,
        cfg,
        Variant.GUMBEL_EXTREMAL,
        _location(cfg.delta),
        ell,
        eset.measure,
    )


def _kstar_matrix(points: np.ndarray, n: int, h: float, k: KernelSpec):
    """Sparse ``len(points) x n`` matrix of ``K*((i/n - t)/h)``."""
    reach = int(math.ceil(n * h)) + 1
    offsets = np.arange(-reach, reach + 1)
    centre = np.rint(points * n).astype(int)
    cols = centre[:, None] + offsets[None, :]
    valid = (cols >= 1) & (cols <= n)
    weights = np.where(valid, kstar_eval(k, (cols / n - points[:, None]) / h), 0.0)
    keep = weights != 0.0
    rows = np.broadcast_to(np.arange(points.size)[:, None], cols.shape)
    return sparse.csr_matrix(
        (weights[keep], (rows[keep], cols[keep] - 1)), shape=(points.size, n)
    )


def simulate_gn(
    eset: ExtremalSet,
    n: int,
    h: float,
    k: KernelSpec,
    j: int,
    reps: int,
    seed=None,
) -> np.ndarray:
    """Replicates of the Gaussian multiplier statistic over the extremal set.

    Replicate ``r`` draws its normals from the ``r``-th child of
    ``SeedSequence(seed)``, so any subset of replicates can be reproduced
    independently.  ``j=1`` takes the one-sided supremum, ``j=2`` the
    supremum of the absolute value.
    """
    if j not in (1, 2):
        raise ValueError(f"j must be 1 or 2, got {j!r}")
    if reps < MIN_QUANTILE_REPS:
        raise ValueError(f"reps must be at least {MIN_QUANTILE_REPS}, got {reps}")
    points = eset.points
    ell = scaling_ell(eset.measure, h, k.lambda_k)
    matrix = _kstar_matrix(points, n, h, k)
    factor = ell * math.sqrt(n * h) / k.l2_norm_kstar / (n * h)

    children = np.random.SeedSequence(seed).spawn(reps)
    out = np.empty(reps)
    batch = max(1, _BATCH_ENTRIES // n)
    for start in range(0, reps, batch):
        stop = min(reps, start + batch)
        draws = np.vstack(
            [np.random.default_rng(child).standard_normal(n) for child in children[start:stop]]
        )
        process = np.asarray(matrix @ draws.T).T
        if j == 2:
            process = np.abs(process)
        out[start:stop] = factor * process.max(axis=1) - ell * ell
    return out


def empirical_quantile(replicates: np.ndarray, alpha: float) -> float:
    """Order statistic ``ceil(reps * (1 - alpha))`` of the sorted replicates."""
    _check_probability(alpha, "alpha")
    ordered = np.sort(replicates)
    index = int(math.ceil(ordered.size * (1.0 - alpha) - 1e-9))
    return float(ordered[min(max(index, 1), ordered.size) - 1])


def simulate_gn_quantile(
    eset: ExtremalSet,
    n: int,
    h: float,
    k: KernelSpec,
    j: int,
    reps: int,
    seed=None,
    alpha: Optional[float] = None,
) -> float:
    """Empirical ``(1 - alpha)``-quantile of :func:`simulate_gn`."""
    # Avoid a cyclic import.
    import reldev

    if alpha is None:
        alpha = reldev.DEFAULT_ALPHA
    return empirical_quantile(simulate_gn(eset, n, h, k, j, reps, seed), alpha)


def _simulated_outcome(
    dev: DeviationCurve,
    eset: ExtremalSet,
    sigma_hat: float,
    k: KernelSpec,
    cfg: TestConfig,
    replicates: Optional[np.ndarray] = None,
) -> TestOutcome:
    if not eset.measure > 0:
        raise ValueError("the extremal set must have positive measure")
    j = 2 if cfg.delta == 0 else 1
    if replicates is None:
        replicates = simulate_gn(
            eset, dev.n, dev.bandwidth, k, j, cfg.quantile_reps, cfg.seed
        )
    ell = scaling_ell(eset.measure, dev.bandwidth, k.lambda_k)
    scale = _scale(sigma_hat, k, dev.n, dev.bandwidth)
    q = empirical_quantile(replicates, cfg.alpha)
    threshold = cfg.delta + _critical(q, ell, scale)
    outcome = TestOutcome(
        statistic=dev.sup,
        threshold=threshold,
        reject=bool(dev.sup > threshold),
        p_value=None,
        sigma_hat=sigma_hat,
        bandwidth=dev.bandwidth,
        ell_used=ell,
        extremal_measure=eset.measure,
        quantile_source=(
            QuantileSource.SIMULATED_GN2 if j == 2 else QuantileSource.SIMULATED_GN1
        ),
        variant=Variant.SIMULATED_QUANTILE,
        delta=cfg.delta,
        alpha=cfg.alpha,
        location=_location(cfg.delta),
        scale=scale,
        quantile=q,
        replicates=replicates,
    )
    return dataclasses.replace(outcome, p_value=p_value(outcome))


def simulated_quantile_test(
    dev: DeviationCurve,
    eset: ExtremalSet,
    sigma_hat: float,
    k: KernelSpec,
    cfg: TestConfig,
) -> TestOutcome:
    """Extremal-set test with simulated quantiles (two-sided only for ``delta == 0``)."""
    return _simulated_outcome(dev, eset, sigma_hat, k, cfg)


def p_value(outcome: TestOutcome) -> float:
    """Smallest level at which ``outcome``'s test rejects.

    Closed-form tests invert the Gumbel distribution function.  Simulated
    tests report the fraction of replicates at or above the standardized
    statistic, with resolution ``1/reps`` and floored at ``1/(2 reps)``.
    """
    z = _standardized(outcome.statistic, outcome.delta, outcome.ell_used, outcome.scale)
    if outcome.replicates is None:
        return float(stats.gumbel_r.sf(z, loc=outcome.location))
    reps = outcome.replicates.size
    exceed = int(np.count_nonzero(outcome.replicates >= z))
    return max(exceed / reps, 1.0 / (2 * reps))


def run_test(
    dev: DeviationCurve,
    eset: Optional[ExtremalSet],
    sigma_hat: float,
    k: KernelSpec,
    cfg: TestConfig,
) -> TestOutcome:
    """Dispatch on ``cfg.variant``."""
    if cfg.variant is Variant.BAND:
        return conf_band_test(dev, sigma_hat, k, cfg)
    if cfg.variant is Variant.GUMBEL_SIMPLE:
        return gumbel_simple_test(dev, sigma_hat, k, cfg)
    if eset is None:
        raise ValueError(f"the {cfg.variant.value} test needs an extremal set")
    if cfg.variant is Variant.GUMBEL_EXTREMAL:
        return gumbel_extremal_test(dev, eset, sigma_hat, k, cfg)
    return simulated_quantile_test(dev, eset, sigma_hat, k, cfg)


def band_halfwidth(
    n: int,
    h: float,
    sigma_hat: float,
    k: KernelSpec,
    alpha: float,
    measure: float,
) -> float:
    """Half-width ``c_{n,alpha}`` of the simultaneous confidence band."""
    ell = scaling_ell(measure, h, k.lambda_k)
    q = gumbel_quantile(LOG2, 1.0 - alpha)
    return _critical(q, ell, _scale(sigma_hat, k, n, h))


def confidence_band(
    curve: SmoothCurve,
    sigma_hat: float,
    k: KernelSpec,
    alpha: Optional[float] = None,
    use_ell_prime: bool = True,
    x0: float = 0.0,
    x1: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper limits ``mu_tilde(t) -/+ c_{n,alpha}`` on the curve's grid."""
    # Avoid a cyclic import.
    import reldev

    if alpha is None:
        alpha = reldev.DEFAULT_ALPHA
    lo, hi = curve.interval
    measure = x1 - x0 if use_ell_prime else hi - lo
    width = band_halfwidth(curve.n, curve.bandwidth, sigma_hat, k, alpha, measure)
    return curve.values - width, curve.values + width
