"""JSON-lines reading/writing with per-record error collection.

All writers are deterministic (sorted keys, fixed separators) so that
reruns produce byte-identical output files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator


@dataclass(frozen=True)
class RecordError:
    """One rejected input record: line number (1-based) and reason."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


def iter_records(path: str | Path) -> Iterator[tuple[int, Any, str | None]]:
    """Yield (line_number, parsed_record_or_None, error_or_None) per line.

    Blank lines are skipped. Parse failures yield an error instead of
    raising, so callers can collect diagnostics and keep going.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                yield lineno, json.loads(text), None
            except json.JSONDecodeError as exc:
                yield lineno, None, f"invalid JSON: {exc.msg}"


def read_valid(
    path: str | Path,
    validate: Callable[[Any], Any],
) -> tuple[list[Any], list[RecordError]]:
    """Parse a JSONL file, running ``validate`` on each record.

    ``validate`` returns the converted item or raises ValueError with a
    field-level message. Returns (items, errors).
    """
    items: list[Any] = []
    errors: list[RecordError] = []
    for lineno, record, err in iter_records(path):
        if err is not None:
            errors.append(RecordError(lineno, err))
            continue
        try:
            items.append(validate(record))
        except ValueError as exc:
            errors.append(RecordError(lineno, str(exc)))
    return items, errors


def dumps(record: Any) -> str:
    """Deterministic single-line JSON encoding."""
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_records(path: str | Path, records: Iterable[Any]) -> int:
    """Write records one per line; returns the number written."""
    count = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps(record))
            fh.write("\n")
            count += 1
    return count
