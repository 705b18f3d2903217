# Command-line front end
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

"""The ``reldev`` command.

Exit status of ``reldev test``: 0 when the hypothesis of no relevant
deviation is kept, 3 when it is rejected, 1 on any error.  The other
subcommands exit with 0 or 1.

Every option may also be given in a ``key = value`` file passed with
``reldev --config FILE``; options on the command line take precedence.
"""

from __future__ import annotations

import csv
import logging
import math

import click

from . import DEFAULT_FOLDS, DEFAULT_KERNEL, __version__
from .api import run_pipeline, scan_deltas
from .config import RunConfig, read_config_file
from .exceptions import RelDevError
from .ingest import ingest_csv
from .kernels import get_kernel, kernel_names
from .simulation.runner import PANELS, run_table
from .smoothing import cross_validate
from .testing import Variant

__all__ = ["main"]

log = logging.getLogger(__name__)

EXIT_ACCEPT = 0
EXIT_ERROR = 1
EXIT_REJECT = 3

_VERBOSITY = (logging.WARNING, logging.INFO, logging.DEBUG)


class PipelineError(click.ClickException):
    exit_code = EXIT_ERROR


def _input_option(func):
    return click.option(
        "--input",
        "-i",
        metavar="PATH|URL|-",
        help="CSV series: a file, an http(s) URL, or - for standard input.",
    )(func)


def _smoothing_options(func):
    options = [
        click.option("--kernel", type=click.Choice(kernel_names()), help="Smoothing kernel."),
        click.option("--folds", type=int, help="Cross-validation folds."),
        click.option("--seed", type=int, help="Seed for folds and quantile simulation."),
        click.option(
            "--contiguous-folds",
            is_flag=True,
            default=False,
            help="Use consecutive blocks as cross-validation folds.",
        ),
        click.option(
            "--thin-cv",
            is_flag=True,
            default=False,
            help="Score about 100 candidate bandwidths instead of all of them.",
        ),
        click.option(
            "--cv-gap",
            type=click.IntRange(min=0),
            help="Neighbours withheld on each side of a held-out point (default: n^(1/3)/2).",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _analysis_options(func):
    options = [
        click.option(
            "--benchmark",
            default="full-mean",
            show_default=True,
            help="initial, partial-mean:<x0>, full-mean or constant:<c>.",
        ),
        click.option("--alpha", type=float, help="Nominal level."),
        click.option("--bandwidth", type=float, help="Fixed bandwidth; omit to cross-validate."),
        click.option(
            "--variant",
            type=click.Choice([v.value for v in Variant]),
            default=Variant.SIMULATED_QUANTILE.value,
            show_default=True,
        ),
        click.option(
            "--locally-stationary",
            is_flag=True,
            default=False,
            help="Standardize by a time-varying long-run variance.",
        ),
        click.option("--x0", type=float, default=0.0, show_default=True),
        click.option("--x1", type=float, default=1.0, show_default=True),
        click.option("--epoch-start", type=float, help="Calendar value of the first observation."),
        click.option(
            "--epoch-per-unit",
            type=float,
            default=1.0,
            show_default=True,
            help="Observations per calendar unit.",
        ),
        click.option("--quantile-reps", type=int, help="Replicates of the simulated quantile."),
        click.option(
            "--use-ell-prime/--use-interval-length",
            default=True,
            help="Measure of the scaling set for the band and simple tests.",
        ),
        click.option("--refine", type=int, default=1, show_default=True),
        click.option("--block-length", type=int, help="Block length of the variance estimate."),
        click.option("--tau", type=float, help="Local variance bandwidth."),
        click.option("--m", type=int, help="Local variance block length."),
        click.option("--delta-n", type=float, help="Margin reduction for the first change."),
        click.option("--delta-n-constant", type=float, default=2.0, show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return _smoothing_options(func)


def _pipeline_options(func):
    options = [
        click.option("--delta", type=float, default=1.0, show_default=True, help="Margin."),
        click.option("--output", "-o", help="Write the JSON report here."),
        click.option("--band-output", help="Write the confidence band as CSV here."),
    ]
    for option in reversed(options):
        func = option(func)
    return _input_option(_analysis_options(func))


def _run(options: dict, **overrides):
    options = {**options, **overrides}
    try:
        if options.get("input") == "-":
            options["series"] = ingest_csv(click.get_text_stream("stdin"))
            options["input"] = None
        return run_pipeline(RunConfig(**options))
    except (RelDevError, ValueError) as exception:
        raise PipelineError(str(exception)) from exception


def _verdict(report) -> str:
    test = report["test"]
    word = "REJECT" if test["reject"] else "ACCEPT"
    return (
        f"{word} no relevant deviation: sup={test['statistic']:.6g} "
        f"threshold={test['threshold']:.6g} p={test['p_value']:.4g} "
        f"({test['variant']}, delta={test['delta']:g}, alpha={test['alpha']:g})"
    )


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="reldev")
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False),
    help="key = value file with option defaults.",
)
@click.option("--verbose", "-v", count=True, help="Repeat for more detail.")
@click.pass_context
def main(ctx, config_file, verbose):
    """Test for relevant deviations of a smooth mean from a benchmark."""
    logging.basicConfig(
        level=_VERBOSITY[min(verbose, len(_VERBOSITY) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)
    if config_file:
        try:
            defaults = read_config_file(config_file)
        except RelDevError as exception:
            raise PipelineError(str(exception)) from exception
        log.debug("defaults from %s: %s", config_file, sorted(defaults))
        ctx.default_map = {name: defaults for name in main.commands}


@main.command()
@_pipeline_options
@click.pass_context
def test(ctx, **options):
    """Test H0: sup |mu - g(mu)| <= delta."""
    report = _run(options)
    click.echo(_verdict(report))
    if options["output"]:
        click.echo(f"report: {options['output']}")
    ctx.exit(EXIT_REJECT if report["test"]["reject"] else EXIT_ACCEPT)


@main.command()
@_pipeline_options
def band(**options):
    """Write the simultaneous confidence band for the mean as CSV."""
    if not options["band_output"]:
        raise click.UsageError("band needs --band-output")
    report = _run(options, first_change=False)
    click.echo(f"band: {report['band_csv']} (bandwidth {report['bandwidth']:.6g})")


@main.command("first-change")
@_pipeline_options
def first_change(**options):
    """Estimate the time of the first relevant deviation."""
    report = _run(options, first_change=True)
    change = report.get("first_change")
    if change is None or math.isinf(change["t_star_hat"]):
        click.echo("t_star_hat=inf (no relevant deviation found)")
        return
    line = f"t_star_hat={change['t_star_hat']:.6g} delta_n={change['delta_n']:.4g}"
    if "epoch" in change:
        line += f" epoch={change['epoch']:g}"
    click.echo(line)


def _change_cell(entry) -> str:
    if "t_star_hat" not in entry:
        return ""
    value = entry.get("epoch", entry["t_star_hat"])
    return "inf" if math.isinf(value) else f"{value:g}"


@main.command()
@click.argument("inputs", nargs=-1, required=True, metavar="INPUT...")
@click.option(
    "--delta",
    "deltas",
    type=float,
    multiple=True,
    default=(1.0,),
    show_default=True,
    help="Margin; repeat to test several.",
)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--output", "-o", type=click.File("w"), default="-")
@_analysis_options
def scan(inputs, deltas, fmt, output, **options):
    """Tabulate p-values and first change times for several margins.

    Each INPUT (a file, an http(s) URL, or - for standard input) is analysed
    once and yields one row: the p-value in percent and the first change
    time for every --delta.
    """
    reports = []
    for source in inputs:
        try:
            data = {"input": source}
            if source == "-":
                data = {"series": ingest_csv(click.get_text_stream("stdin"))}
            cfg = RunConfig(**data, delta=max(deltas), **options)
            reports.append((source, scan_deltas(cfg, deltas)))
        except (RelDevError, ValueError) as exception:
            raise PipelineError(f"{source}: {exception}") from exception

    if fmt == "json":
        for source, report in reports:
            report["series"] = source
            output.write(report.to_json(indent=None))
            output.write("\n")
        return
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(
        ["series", "n", "bandwidth"]
        + [f"p_percent_{delta:g}" for delta in deltas]
        + [f"first_change_{delta:g}" for delta in deltas]
    )
    for source, report in reports:
        entries = report["deltas"]
        writer.writerow(
            [source, report["n"], f"{report['bandwidth']:.4g}"]
            + [f"{100 * entry['p_value']:.1f}" for entry in entries]
            + [_change_cell(entry) for entry in entries]
        )


@main.command("cv-bandwidth")
@_input_option
@_smoothing_options
@click.option("--trace", is_flag=True, default=False, help="Print every candidate's score.")
def cv_bandwidth(**options):
    """Select the bandwidth by cross-validation."""
    source = options["input"]
    if source is None:
        raise click.UsageError("cv-bandwidth needs --input")
    try:
        series = ingest_csv(click.get_text_stream("stdin") if source == "-" else source)
        result = cross_validate(
            series,
            get_kernel(options["kernel"] or DEFAULT_KERNEL),
            folds=options["folds"] or DEFAULT_FOLDS,
            seed=options["seed"],
            contiguous=options["contiguous_folds"],
            thin=options["thin_cv"],
            gap=options["cv_gap"],
        )
    except (RelDevError, ValueError) as exception:
        raise PipelineError(str(exception)) from exception
    if options["trace"]:
        for h, score in result.trace():
            click.echo(f"{h:.6g},{score:.6g}")
    click.echo(f"bandwidth={result.bandwidth:.6g}")


@main.command()
@click.option("--table", type=click.Choice(["1", "2"]), required=True)
@click.option("--panel", type=click.Choice(sorted(PANELS), case_sensitive=False), required=True)
@click.option("--n", "n", type=int, default=500, show_default=True)
@click.option("--runs", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--processes", type=int, help="Worker processes (default: all CPUs).")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--quantile-reps", type=int, default=2000, show_default=True)
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--thin-cv", is_flag=True, default=False)
@click.option("--cv-gap", type=click.IntRange(min=0))
@click.option("--progress/--no-progress", default=False)
@click.option("--output", "-o", type=click.File("w"), default="-")
def simulate(
    table,
    panel,
    n,
    runs,
    seed,
    processes,
    alpha,
    quantile_reps,
    folds,
    thin_cv,
    cv_gap,
    progress,
    output,
):
    """Rejection rates (percent) of every test for one table panel."""
    try:
        rows = run_table(
            int(table),
            panel,
            n,
            runs,
            seed=seed,
            processes=processes,
            progress=progress,
            alpha=alpha,
            quantile_reps=quantile_reps,
            folds=folds,
            thin_cv=thin_cv,
            cv_gap=cv_gap,
        )
    except (RelDevError, ValueError) as exception:
        raise PipelineError(str(exception)) from exception
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(
        ["parameter", "d_inf_minus_delta", "band", "simple", "simulated", "extremal", "failures"]
    )
    for row in rows:
        writer.writerow(
            [
                f"{row['parameter']:.4g}",
                f"{row['d_inf_minus_delta']:.3f}",
                f"{100 * row['rate_band']:.1f}",
                f"{100 * row['rate_simple']:.1f}",
                f"{100 * row['rate_simulated']:.1f}",
                f"{100 * row['rate_extremal']:.1f}",
                row["failures"],
            ]
        )


if __name__ == "__main__":
    main()
