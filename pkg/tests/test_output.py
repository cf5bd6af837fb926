"""Record writer tests."""

import csv
import io
import json
import math

import pytest

from torus_consensus.enums import OutputFormat
from torus_consensus.output import format_cell, write_records


@pytest.mark.parametrize(
    "value, expected",
    [
        (None, ""),
        (True, "true"),
        (False, "false"),
        (3, "3"),
        (0.5, "0.5"),
        (1 / 3, "0.33333333333333331"),
        ((16, 18, 20), "16x18x20"),
        ("mixed", "mixed"),
    ],
)
def test_format_cell(value, expected):
    assert format_cell(value) == expected


def test_precision_is_configurable():
    assert format_cell(1 / 3, precision=6) == "0.333333"


RECORDS = [
    {"dims": (4,), "r": 1, "h": 1 / 3, "gamma": 0.1 + 0.2, "note": None, "ok": True},
    {"dims": (16, 19), "r": 2, "h": math.pi, "gamma": 1e-300, "note": "x", "ok": False},
]


def test_csv_and_json_encode_identical_values():
    csv_buf, json_buf = io.StringIO(), io.StringIO()

    assert write_records(RECORDS, csv_buf, OutputFormat.CSV) == 2
    assert write_records(RECORDS, json_buf, OutputFormat.JSON) == 2

    rows = list(csv.DictReader(io.StringIO(csv_buf.getvalue())))
    objects = json.loads(json_buf.getvalue())
    for row, obj, record in zip(rows, objects, RECORDS):
        for key in ("h", "gamma"):
            assert float(row[key]) == record[key]
            assert obj[key] == record[key]
        assert obj["dims"] == list(record["dims"])


def test_missing_values():
    csv_buf, json_buf = io.StringIO(), io.StringIO()

    write_records(RECORDS[:1], csv_buf, OutputFormat.CSV)
    write_records(RECORDS[:1], json_buf, OutputFormat.JSON)

    row = next(csv.DictReader(io.StringIO(csv_buf.getvalue())))
    assert row["note"] == ""
    assert row["ok"] == "true"
    assert json.loads(json_buf.getvalue())[0]["note"] is None


def test_csv_is_stable():
    first, second = io.StringIO(), io.StringIO()

    write_records(RECORDS, first)
    write_records(RECORDS, second)

    assert first.getvalue() == second.getvalue()
    assert first.getvalue().splitlines()[0] == "dims,r,h,gamma,note,ok"


def test_empty_csv_writes_nothing():
    buf = io.StringIO()

    assert write_records([], buf) == 0
    assert buf.getvalue() == ""
