"""CSV and JSON writers for the data files of every command."""
from __future__ import annotations

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import mpmath
from mpmath import mp

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
TIMESTAMP_PREFIX = "# generated "


def timestamp_line() -> str:
    return TIMESTAMP_PREFIX + datetime.now(timezone.utc).isoformat(timespec="seconds")


def format_value(value: Any, digits: int) -> str:
    """Decimal text with ``digits`` significant digits for mpmath and float values."""

    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (mpmath.mpf, mpmath.mpc, float)):
        return mp.nstr(value, digits)
    return str(value)


def _json_value(value: Any, digits: int) -> Any:
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, Mapping):
        return {str(key): _json_value(item, digits) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(item, digits) for item in value]
    return format_value(value, digits)


def write_csv(
    path: PathLike,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    *,
    digits: int = 12,
    timestamp: bool = True,
) -> int:
    """Writes the header and the rows; returns the number of data rows."""

    count = 0
    target = Path(path)
    with target.open("w", encoding="utf-8", newline="") as handle:
        if timestamp:
            handle.write(timestamp_line() + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value, digits) for value in row])
            count += 1
    logger.info("Wrote %s rows to %s", count, target)
    return count


def write_json(
    path: PathLike,
    payload: Mapping[str, Any],
    *,
    digits: int = 12,
    timestamp: bool = True,
) -> None:
    data: Dict[str, Any] = _json_value(dict(payload), digits)
    if timestamp:
        data["generated"] = timestamp_line()[len(TIMESTAMP_PREFIX):]
    target = Path(path)
    target.write_text(json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("Wrote %s", target)


def write_table(
    path: PathLike,
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    *,
    fmt: str = "csv",
    digits: int = 12,
    timestamp: bool = True,
    extra: Optional[Mapping[str, Any]] = None,
) -> int:
    """Writes rows as CSV, or as JSON ``{"columns", "rows", ...extra}``."""

    if fmt == "csv":
        return write_csv(path, header, rows, digits=digits, timestamp=timestamp)
    payload: Dict[str, Any] = {"columns": list(header), "rows": [list(row) for row in rows]}
    payload.update(extra or {})
    write_json(path, payload, digits=digits, timestamp=timestamp)
    return len(rows)


def read_csv(path: PathLike) -> Tuple[List[str], List[Dict[str, str]]]:
    """Header and rows of a file written by ``write_csv``; comment lines are skipped."""

    with Path(path).open(encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    reader = csv.DictReader(lines)
    rows = list(reader)
    return list(reader.fieldnames or []), rows
