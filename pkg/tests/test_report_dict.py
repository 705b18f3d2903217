import json
import math

import numpy as np

from reldev.testing import Variant
from reldev.util import ReportDict, jsonable


def _check_key(k, d):
    assert k in d
    assert hasattr(d, k)
    assert d[k] == 1
    assert getattr(d, k) == 1


def _check_no_key(k, d):
    assert k not in d
    assert not hasattr(d, k)


def test_empty():
    d = ReportDict()
    keys = ("a", "h", "bandwidth", "sigma", "d_inf", "eset", "t_star", "band")
    for k in keys:
        _check_no_key(k, d)
    assert "items" not in d
    assert hasattr(d, "items")  # dict.items() exists


def test_neutral():
    d = ReportDict()
    d["a"] = 1
    _check_key("a", d)


def test_aliases_read_the_canonical_key():
    d = ReportDict(bandwidth=1, sigma_hat=1, sup_deviation=1, extremal_set=1, first_change=1)
    for k in ("h", "sigma", "d_inf", "statistic", "eset", "t_star"):
        _check_key(k, d)


def test_aliases_write_the_canonical_key():
    d = ReportDict()
    d["h"] = 1
    assert list(d) == ["bandwidth"]
    _check_key("bandwidth", d)
    _check_key("h", d)


def test_get():
    d = ReportDict(test=ReportDict(reject=True))
    assert d.get("outcome")["reject"] is True
    assert d.outcome.reject is True
    assert d.get("band") is None
    assert d.get("band", "none") == "none"


def test_to_json_is_sorted():
    d = ReportDict(zeta=1, alpha=2, mid=ReportDict(b=1, a=2))
    text = d.to_json(indent=None)
    assert text == '{"alpha": 2, "mid": {"a": 2, "b": 1}, "zeta": 1}'


def test_to_json_exclude():
    d = ReportDict(bandwidth=0.1, created="now", n=10)
    assert json.loads(d.to_json(exclude=("created", "h"))) == {"n": 10}


def test_to_json_types():
    d = ReportDict(
        t_star_hat=math.inf,
        low=-math.inf,
        missing=math.nan,
        variant=Variant.BAND,
        flag=np.bool_(True),
        count=np.int64(3),
        value=np.float32(0.5),
        grid=np.array([0.25, 0.5]),
        pair=(1, 2),
    )
    assert json.loads(d.to_json()) == {
        "t_star_hat": "inf",
        "low": "-inf",
        "missing": None,
        "variant": "band",
        "flag": True,
        "count": 3,
        "value": 0.5,
        "grid": [0.25, 0.5],
        "pair": [1, 2],
    }


def test_jsonable_passes_strings():
    assert jsonable({1: "x"}) == {"1": "x"}
