# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is part of reldev.
#
# Redistribution and use in source and binary forms, with or without modification,
# are permitted provided that the following conditions are met:
#
# * Redistributions of source code must retain the above copyright notice,
#   this list of conditions and the following disclaimer.
# * Redistributions in binary form must reproduce the above copyright notice,
#   this list of conditions and the following disclaimer in the documentation
#   and/or other materials provided with the distribution.
#
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS 'AS IS'
# AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE
# IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE
# ARE DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT OWNER OR CONTRIBUTORS BE
# LIABLE FOR ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR
# CONSEQUENTIAL DAMAGES (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF
# SUBSTITUTE GOODS OR SERVICES; LOSS OF USE, DATA, OR PROFITS; OR BUSINESS
# INTERRUPTION) HOWEVER CAUSED AND ON ANY THEORY OF LIABILITY, WHETHER IN
# CONTRACT, STRICT LIABILITY, OR TORT (INCLUDING NEGLIGENCE OR OTHERWISE)
# ARISING IN ANY WAY OUT OF THE USE OF THIS SOFTWARE, EVEN IF ADVISED OF THE
# POSSIBILITY OF SUCH DAMAGE.

__license__ = "BSD 2-clause"
__version__ = "0.3.0"

# HTTP "User-Agent" header to send to servers when downloading a series.
# If you are embedding reldev in a larger application, you should
# change this to your application name and URL.
USER_AGENT = "reldev/%s +https://github.com/reldev/reldev/" % __version__

# Kernel used when none is named.
DEFAULT_KERNEL = "quartic"

# Nominal level of the tests and of the confidence band.
DEFAULT_ALPHA = 0.05

# Replicates drawn for the simulated extremal-set quantile.
DEFAULT_QUANTILE_REPS = 2000

# Folds of the bandwidth cross-validation.
DEFAULT_FOLDS = 10

# Exponent slack of the extremal set threshold ell**(1 + RHO_EPSILON) / sqrt(n h).
RHO_EPSILON = 0.001

from .api import analyze, decide, run_pipeline, scan_deltas  # noqa: E402
from .benchmarks import BenchmarkSpec  # noqa: E402
from .config import RunConfig  # noqa: E402
from .exceptions import (  # noqa: E402
    BandwidthOverflow,
    BlockTooLarge,
    ConfigError,
    DegenerateVariance,
    IngestError,
    InvalidKernel,
    InvalidMargin,
    InvalidProbability,
    NoValidBandwidth,
    ParseError,
    QuadratureFailure,
    RelDevError,
    SingularDesign,
    TooFewObservations,
)
from .ingest import ingest_csv  # noqa: E402
from .kernels import get_kernel  # noqa: E402
from .smoothing import TimeSeries  # noqa: E402
from .testing import TestConfig, Variant  # noqa: E402
from .util import ReportDict  # noqa: E402

__all__ = (
    "analyze",
    "decide",
    "run_pipeline",
    "scan_deltas",
    "ingest_csv",
    "get_kernel",
    "BenchmarkSpec",
    "RunConfig",
    "TestConfig",
    "TimeSeries",
    "Variant",
    "ReportDict",
    "RelDevError",
    "BandwidthOverflow",
    "BlockTooLarge",
    "ConfigError",
    "DegenerateVariance",
    "IngestError",
    "InvalidKernel",
    "InvalidMargin",
    "InvalidProbability",
    "NoValidBandwidth",
    "ParseError",
    "QuadratureFailure",
    "SingularDesign",
    "TooFewObservations",
)
