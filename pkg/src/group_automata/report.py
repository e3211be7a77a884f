from __future__ import annotations

import csv
import io
import logging
import sys
from collections.abc import Iterable
from collections.abc import Mapping
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from group_automata import __version__

logger = logging.getLogger(__name__)


def _cell(value: Any) -> str:
    match value:
        case None:
            return ""
        case bool():
            return "1" if value else "0"
        case float():
            return repr(value)
        case Enum():
            return str(value.value)
        case _:
            return str(value)


@dataclass
class CsvReport:
    """One header line, `#`-prefixed metadata above it and summary lines below."""

    command: str
    columns: list[str]
    metadata: dict[str, Any] = field(default_factory=dict)
    rows: list[list[str]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    failure: str | None = None
    """Set when the run completed but a check it performs did not hold."""

    def add(self, row: BaseModel | Mapping[str, Any]) -> None:
        values = row.model_dump() if isinstance(row, BaseModel) else dict(row)
        missing = [c for c in self.columns if c not in values]
        if missing:
            raise KeyError(f"row lacks columns {missing}")
        self.rows.append([_cell(values[c]) for c in self.columns])

    def extend(self, rows: Iterable[BaseModel | Mapping[str, Any]]) -> None:
        for row in rows:
            self.add(row)

    def render(self) -> str:
        buffer = io.StringIO()
        buffer.write(f"# group-automata {__version__}\n")
        buffer.write(f"# command: {self.command}\n")
        for key, value in self.metadata.items():
            buffer.write(f"# {key}: {_cell(value)}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        for key, value in self.summary.items():
            buffer.write(f"# summary {key}: {_cell(value)}\n")
        return buffer.getvalue()

    def write(self, out: str | Path | None) -> None:
        text = self.render()
        if out is None:
            sys.stdout.write(text)
            return
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info("Wrote %d rows to %s", len(self.rows), path)
