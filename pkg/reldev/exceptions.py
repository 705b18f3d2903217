# Exceptions and warnings used throughout reldev
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

__all__ = [
    "RelDevError",
    "InvalidKernel",
    "QuadratureFailure",
    "SingularDesign",
    "NoValidBandwidth",
    "BlockTooLarge",
    "BandwidthOverflow",
    "InvalidProbability",
    "InvalidMargin",
    "DegenerateVariance",
    "IngestError",
    "ParseError",
    "TooFewObservations",
    "ConfigError",
    "RelDevWarning",
    "BandwidthClampWarning",
    "VarianceFloorWarning",
    "MarginWarning",
]


class RelDevError(Exception):
    pass


class InvalidKernel(RelDevError, ValueError):
    pass


class QuadratureFailure(RelDevError):
    pass


class SingularDesign(RelDevError):
    """The weighted local-linear design matrix cannot be inverted at ``t``."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"singular local-linear design at t={t:.6g}")


class NoValidBandwidth(RelDevError):
    pass


class BlockTooLarge(RelDevError, ValueError):
    pass


class BandwidthOverflow(RelDevError, ValueError):
    pass


class InvalidProbability(RelDevError, ValueError):
    pass


class InvalidMargin(RelDevError, ValueError):
    pass


class DegenerateVariance(RelDevError):
    pass


class IngestError(RelDevError):
    pass


class ParseError(IngestError):
    def __init__(self, line, message=None):
        self.line = line
        super().__init__(message or f"non-numeric value on line {line}")


class TooFewObservations(RelDevError, ValueError):
    pass


class ConfigError(RelDevError, ValueError):
    pass


class RelDevWarning(UserWarning):
    pass


class BandwidthClampWarning(RelDevWarning):
    pass


class VarianceFloorWarning(RelDevWarning):
    pass


class MarginWarning(RelDevWarning):
    pass
