"""Run report envelopes and their JSON / CSV renderings."""

from __future__ import annotations

import csv
import io
import logging
from datetime import UTC, datetime
from typing import TYPE_CHECKING, Any

import typer
from pydantic import BaseModel

from vc_gap_lab import __version__
from vc_gap_lab.models import OutputFormat, RunConfig, RunReport, RunStatus

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

logger = logging.getLogger(__name__)

ISOPERIMETRY_COLUMNS = ("n", "set_bits_hex", "size", "boundary", "p", "bound", "slack")
POINCARE_COLUMNS = ("n", "set_bits_hex", "size", "boundary", "lhs", "rhs", "slack")


def build_report(
    config: RunConfig,
    status: RunStatus,
    payload: BaseModel | dict[str, Any] | None = None,
    reason: str | None = None,
) -> RunReport:
    """Wrap a payload in the run envelope; the timestamp is omitted when disabled."""
    if isinstance(payload, BaseModel):
        data = payload.model_dump(mode="json")
    else:
        data = payload or {}
    return RunReport(
        version=__version__,
        command=config.command,
        status=status,
        reason=reason,
        config=config,
        generated_at=datetime.now(UTC).isoformat(timespec="seconds") if config.timestamp else None,
        payload=data,
    )


def flatten(data: Any, prefix: str = "") -> list[tuple[str, str]]:
    """Dotted ``key,value`` rows of a nested mapping."""
    if isinstance(data, dict):
        rows: list[tuple[str, str]] = []
        for key, value in data.items():
            rows.extend(flatten(value, f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(data, list) and any(isinstance(v, dict | list) for v in data):
        rows = []
        for i, value in enumerate(data):
            rows.extend(flatten(value, f"{prefix}.{i}"))
        return rows
    if isinstance(data, list):
        return [(prefix, " ".join(str(v) for v in data))]
    return [(prefix, "" if data is None else str(data))]


def render_report(
    report: RunReport,
    fmt: OutputFormat,
    records: Sequence[BaseModel] | None = None,
    columns: Sequence[str] | None = None,
) -> str:
    """JSON envelope, or CSV of ``records`` (or of the flattened envelope)."""
    if fmt is OutputFormat.JSON:
        return report.model_dump_json(indent=2, exclude_none=False) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if records is not None and columns is not None:
        writer.writerow(columns)
        for record in records:
            dumped = record.model_dump(mode="json")
            writer.writerow([dumped[c] for c in columns])
    else:
        writer.writerow(("key", "value"))
        writer.writerows(flatten(report.model_dump(mode="json")))
    return buffer.getvalue()


def write_output(text: str, path: Path | None) -> None:
    """Write to ``path`` or, without one, to stdout."""
    if path is None:
        typer.echo(text, nl=False)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info("report written to %s", path)
