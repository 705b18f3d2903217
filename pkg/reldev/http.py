# Fetching remote series over HTTP(S)
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import logging

import requests

from .exceptions import IngestError

log = logging.getLogger(__name__)

# HTTP "Accept" header to send to servers when downloading a series.
ACCEPT_HEADER: str = "text/csv,text/plain;q=0.9,*/*;q=0.1"


def get(url: str) -> bytes:
    from . import USER_AGENT

    try:
        response = requests.get(
            url,
            headers={"User-Agent": USER_AGENT, "Accept": ACCEPT_HEADER},
            timeout=10,
        )
        response.raise_for_status()
    except requests.RequestException as exception:
        raise IngestError(f"cannot fetch {url}: {exception}") from exception

    log.info(
        "fetched %d bytes from %s (status %d)",
        len(response.content),
        response.url,
        response.status_code,
    )
    return response.content
