# Report container with attribute access and key aliases
# Copyright 2024 The reldev developers
# All rights reserved.
#
# This file is a part of reldev.
# Released under the BSD 2-clause license; see LICENSE for details.

from __future__ import annotations

import enum
import json
import math
from typing import Any, Iterable, Optional

import numpy as np

__all__ = [
    "ReportDict",
    "jsonable",
]


def jsonable(value: Any) -> Any:
    """Convert ``value`` into plain JSON types; infinities become ``"inf"``/``"-inf"``."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return None
        return value
    return value


class ReportDict(dict):
    keymap = {
        "h": "bandwidth",
        "sigma": "sigma_hat",
        "d_inf": "sup_deviation",
        "statistic": "sup_deviation",
        "eset": "extremal_set",
        "outcome": "test",
        "t_star": "first_change",
        "band": "band_csv",
    }

    def __getitem__(self, key):
        realkey = self.keymap.get(key, key)
        if dict.__contains__(self, realkey):
            return dict.__getitem__(self, realkey)
        return dict.__getitem__(self, key)

    def __contains__(self, key):
        try:
            self.__getitem__(key)
        except KeyError:
            return False
        return True

    def get(self, key, default=None):
        try:
            return self.__getitem__(key)
        except KeyError:
            return default

    def __setitem__(self, key, value):
        return dict.__setitem__(self, self.keymap.get(key, key), value)

    def __getattr__(self, key):
        # __getattribute__() is called first; this will be called
        # only if an attribute was not already found
        try:
            return self.__getitem__(key)
        except KeyError:
            raise AttributeError("object has no attribute '%s'" % key)

    def to_json(self, exclude: Iterable[str] = (), indent: Optional[int] = 2) -> str:
        """Deterministic JSON text, keys sorted, without the keys in ``exclude``."""
        skip = {self.keymap.get(key, key) for key in exclude}
        data = {k: v for k, v in self.items() if k not in skip}
        return json.dumps(jsonable(data), sort_keys=True, indent=indent, allow_nan=False)
