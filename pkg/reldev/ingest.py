# Reading a time series from CSV text
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import codecs
import csv
import io
import logging
import math
import os
import urllib.parse
from typing import IO, Union

from . import http
from .exceptions import IngestError, ParseError, TooFewObservations
from .smoothing import MIN_OBSERVATIONS, TimeSeries

__all__ = [
    "ingest_csv",
    "decode",
]

log = logging.getLogger(__name__)

Source = Union[str, bytes, os.PathLike, IO[str], IO[bytes]]


def decode(data: bytes) -> str:
    """Decode ``data``, honouring a UTF-8 or UTF-16 byte order mark."""
    if data[:3] == codecs.BOM_UTF8:
        return data[3:].decode("utf-8")
    if data[:2] in (codecs.BOM_UTF16_LE, codecs.BOM_UTF16_BE):
        return data.decode("utf-16")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exception:
        raise IngestError(f"input is not valid UTF-8: {exception}") from exception


def _open_resource(source: Source) -> str:
    """URL, filename, stream or CSV text --> text

    Strings are treated as URLs when they use the http or https scheme, as
    CSV text when they contain a line break, and as paths otherwise.
    """
    if callable(getattr(source, "read", None)):
        data = source.read()  # type: ignore[union-attr]
        return decode(data) if isinstance(data, bytes) else data

    if isinstance(source, bytes):
        return decode(source)

    if isinstance(source, str):
        if urllib.parse.urlparse(source)[0] in ("http", "https"):
            return decode(http.get(source))
        if "\n" in source:
            return source

    try:
        with open(source, "rb") as file:
            return decode(file.read())
    except (OSError, TypeError, ValueError) as exception:
        raise IngestError(f"cannot read {source!r}: {exception}") from exception


def _parse(text: str) -> list[float]:
    values: list[float] = []
    header_allowed = True
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        cells = [cell.strip() for cell in row if cell.strip()]
        if not cells:
            continue
        # A leading time column is ignored; the value is the last column.
        try:
            value = float(cells[-1])
        except ValueError:
            if header_allowed:
                header_allowed = False
                log.debug("skipping header row %r", row)
                continue
            raise ParseError(reader.line_num)
        if not math.isfinite(value):
            raise ParseError(reader.line_num, f"non-finite value on line {reader.line_num}")
        header_allowed = False
        values.append(value)
    return values


def ingest_csv(source: Source, minimum: int = MIN_OBSERVATIONS) -> TimeSeries:
    """Read one observation per row, in row order.

    An optional header row is skipped.  With several columns per row the
    last one holds the value.  Raises :class:`ParseError` with the line
    number of the first non-numeric value and :class:`TooFewObservations`
    when fewer than ``minimum`` values are found.
    """
    values = _parse(_open_resource(source))
    if len(values) < minimum:
        raise TooFewObservations(
            f"found {len(values)} observations, at least {minimum} are required"
        )
    log.info("read %d observations", len(values))
    return TimeSeries(values)
