import codecs
import io

import pytest
import responses

import reldev
from reldev.exceptions import IngestError, ParseError, TooFewObservations
from reldev.ingest import decode, ingest_csv

ROWS = 25


def _csv(header="year,value", sep="\n"):
    lines = [header] if header else []
    lines += [f"{1900 + i},{i / 10}" for i in range(ROWS)]
    return sep.join(lines) + sep


def _expected():
    return [i / 10 for i in range(ROWS)]


def test_text_with_header():
    series = ingest_csv(_csv())
    assert series.values.tolist() == _expected()
    assert series.n == ROWS


def test_text_without_header():
    assert ingest_csv(_csv(header=None)).values.tolist() == _expected()


def test_single_column_and_blank_lines():
    text = "value\n\n" + "\n".join(str(i) for i in range(ROWS)) + "\n\n"
    assert ingest_csv(text).values.tolist() == [float(i) for i in range(ROWS)]


def test_windows_line_endings():
    assert ingest_csv(_csv(sep="\r\n")).values.tolist() == _expected()


@pytest.mark.parametrize(
    "stream",
    (
        lambda text: io.StringIO(text),
        lambda text: io.BytesIO(text.encode("utf-8")),
    ),
)
def test_streams(stream):
    assert ingest_csv(stream(_csv())).values.tolist() == _expected()


def test_bytes_with_bom():
    assert ingest_csv(codecs.BOM_UTF8 + _csv().encode("utf-8")).values.tolist() == _expected()


def test_decode_utf16():
    assert decode("1,2".encode("utf-16")) == "1,2"


def test_decode_rejects_garbage():
    with pytest.raises(IngestError):
        decode(b"\xfe\xfa")


def test_file_path(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text(_csv(), encoding="utf-8")
    assert ingest_csv(path).values.tolist() == _expected()
    assert ingest_csv(str(path)).values.tolist() == _expected()


def test_missing_file(tmp_path):
    with pytest.raises(IngestError, match="cannot read"):
        ingest_csv(tmp_path / "missing.csv")


def test_parse_error_reports_the_line():
    text = _csv() + "1925,oops\n"
    with pytest.raises(ParseError) as info:
        ingest_csv(text)
    assert info.value.line == ROWS + 2
    assert isinstance(info.value, IngestError)


def test_only_one_header_row():
    with pytest.raises(ParseError) as info:
        ingest_csv("a\nb\n" + _csv(header=None))
    assert info.value.line == 2


@pytest.mark.parametrize("value", ("nan", "inf", "-inf"))
def test_non_finite_values(value):
    with pytest.raises(ParseError, match="non-finite"):
        ingest_csv(_csv() + f"1925,{value}\n")


def test_too_few_observations():
    with pytest.raises(TooFewObservations):
        ingest_csv("value\n1\n2\n3\n")
    assert ingest_csv("value\n1\n2\n3\n", minimum=3).n == 3


def test_url():
    url = "https://example.com/series.csv"
    responses.add(responses.GET, url, body=_csv(), content_type="text/csv")
    assert ingest_csv(url).values.tolist() == _expected()
    request = responses.calls[-1].request
    assert request.headers["User-Agent"] == reldev.USER_AGENT
    assert "text/csv" in request.headers["Accept"]


def test_url_not_found():
    url = "http://example.com/missing.csv"
    responses.add(responses.GET, url, status=404)
    with pytest.raises(IngestError, match="cannot fetch"):
        ingest_csv(url)
