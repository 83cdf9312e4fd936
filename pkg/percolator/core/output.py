"""
Output Formatting
=================

Renders command results as JSON, CSV or a plain-text table. Every
rendering carries the resolved run configuration.

Public API:
    Artifact: One command's result in all three shapes
    render: Artifact -> text in the requested format
    emit: Render and write to the output path or stdout
    format_time_table: The (q, r, T) table with exact entries starred
"""

from __future__ import annotations

import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from common.state import ArtifactRepository, FileArtifactRepository, dumps_csv, dumps_json
from common.types import OutputFormat, RunConfig

SEPARATOR_HEAVY = "=" * 70
SEPARATOR_LIGHT = "-" * 70


@dataclass(frozen=True)
class Artifact:
    """
    A command's result.

    Attributes:
        data: JSON payload
        header / rows: CSV view; when empty, CSV falls back to key/value rows of `data`
        text: Human-readable view; when empty, text falls back to indented JSON
        flat: JSON puts the config next to the data keys instead of wrapping
            them, so the file keeps the data's own schema (plane files)
    """

    data: dict[str, Any]
    header: Sequence[str] = ()
    rows: Sequence[Sequence[Any]] = field(default_factory=list)
    text: str = ""
    flat: bool = False


def render(artifact: Artifact, output_format: OutputFormat, config: RunConfig) -> str:
    """Render the artifact with the config echoed in a format-appropriate way."""
    if output_format is OutputFormat.JSON:
        if artifact.flat:
            return dumps_json({**artifact.data, "config": config.to_dict()})
        return dumps_json({"config": config.to_dict(), "result": artifact.data})
    config_line = json.dumps(config.to_dict(), sort_keys=True)
    if output_format is OutputFormat.CSV:
        header, rows = artifact.header, artifact.rows
        if not header:
            header = ("key", "value")
            rows = [(key, _cell(value)) for key, value in sorted(artifact.data.items())]
        return f"# config: {config_line}\n" + dumps_csv(header, rows)
    body = artifact.text or json.dumps(artifact.data, indent=2, sort_keys=True)
    return f"{SEPARATOR_HEAVY}\n  percolator {config.subcommand}\n  config: {config_line}\n{SEPARATOR_HEAVY}\n{body}\n"


def emit(
    artifact: Artifact, config: RunConfig, repository: ArtifactRepository | None = None
) -> Path | None:
    """Write the rendered artifact to config.output_path, or stdout when unset."""
    text = render(artifact, config.output_format, config)
    if config.output_path is None:
        sys.stdout.write(text)
        return None
    repository = repository or FileArtifactRepository()
    return repository.write_text(config.output_path, text)


def format_time_table(cells: Sequence[dict[str, Any]]) -> str:
    """
    Three-row table: q, r and T, one column per cell. Exact entries carry
    a trailing '*'; the others are lower bounds. Cells without a value
    show '-'.
    """
    labels = ("q=", "r=", "T>=")
    columns = []
    for cell in cells:
        value = cell.get("value")
        shown = "-" if value is None else f"{value}{'*' if cell.get('exact') else ''}"
        columns.append((str(cell["q"]), str(cell["r"]), shown))
    widths = [max(len(part) for part in column) for column in columns]
    lines = [SEPARATOR_LIGHT]
    for row, label in enumerate(labels):
        parts = [f"{label:<4}"] + [column[row].rjust(width) for column, width in zip(columns, widths, strict=True)]
        lines.append(" | ".join(parts))
    lines.append(SEPARATOR_LIGHT)
    lines.append("* exact (exhaustive); other entries are lower bounds")
    return "\n".join(lines)


def format_key_values(data: dict[str, Any]) -> str:
    width = max((len(key) for key in data), default=0)
    return "\n".join(f"{key:<{width}} : {_cell(value)}" for key, value in data.items())


def _cell(value: Any) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return str(value)
