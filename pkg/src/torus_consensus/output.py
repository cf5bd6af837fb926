"""CSV and JSON record writers.

Floats are written with 17 significant digits in CSV and with Python's
shortest round-trip repr in JSON, so both parse back to the same doubles.
"""

import csv
import json
import logging
from collections.abc import Iterable, Mapping
from typing import Any, TextIO

from .consts import FLOAT_SIGNIFICANT_DIGITS
from .enums import OutputFormat

logger = logging.getLogger(__name__)

Record = Mapping[str, Any]


def format_cell(value: Any, precision: int = FLOAT_SIGNIFICANT_DIGITS) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, f".{precision}g")
    if isinstance(value, (tuple, list)):
        return "x".join(format_cell(v, precision) for v in value)
    return str(value)


def write_csv(
    records: Iterable[Record], stream: TextIO, precision: int = FLOAT_SIGNIFICANT_DIGITS
) -> int:
    rows = list(records)
    if not rows:
        return 0
    fieldnames = list(rows[0].keys())
    writer = csv.DictWriter(stream, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format_cell(row.get(k), precision) for k in fieldnames})
    return len(rows)


def _jsonable(value: Any) -> Any:
    if isinstance(value, tuple):
        return list(value)
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    return value


def write_json(records: Iterable[Record], stream: TextIO) -> int:
    rows = [{k: _jsonable(v) for k, v in row.items()} for row in records]
    json.dump(rows, stream, indent=2)
    stream.write("\n")
    return len(rows)


def write_records(
    records: Iterable[Record],
    stream: TextIO,
    fmt: OutputFormat = OutputFormat.CSV,
    precision: int = FLOAT_SIGNIFICANT_DIGITS,
) -> int:
    """Write ``records`` in ``fmt`` and return the number of rows written."""
    if fmt == OutputFormat.JSON:
        count = write_json(records, stream)
    else:
        count = write_csv(records, stream, precision)
    logger.debug(f"Wrote {count} {fmt.value} records")
    return count
