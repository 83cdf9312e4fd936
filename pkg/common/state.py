"""
Artifact Storage
================

Provides a single interface for every file the toolkit writes or reads:
plane files, JSON reports and CSV curves.

Writes are atomic (temp file + rename in the destination directory), so an
interrupted run never leaves a truncated artifact behind. Reading never
mutates the source.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, Protocol


def dumps_json(data: Any) -> str:
    """Serialize to the canonical JSON text used by every artifact.

    Keys are sorted and indentation is fixed so repeated runs produce
    byte-identical files.
    """
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Serialize rows to CSV text with a header line and Unix line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


class ArtifactRepository(Protocol):
    """Abstract artifact storage interface.

    This protocol enables testing with in-memory implementations.
    """

    def write_text(self, path: Path, text: str) -> Path:
        """Write text to path and return the resolved path."""
        ...

    def read_json(self, path: Path) -> Any:
        """Read and decode a JSON file."""
        ...


class FileArtifactRepository:
    """Filesystem-backed artifact repository with atomic writes."""

    TEMP_PREFIX = ".percolator_tmp_"

    def write_text(self, path: Path, text: str) -> Path:
        """Write text atomically using the temp file + rename pattern.

        Raises:
            OSError: If the destination directory cannot be written
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, temp_path = tempfile.mkstemp(dir=path.parent, prefix=self.TEMP_PREFIX, suffix=path.suffix, text=True)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(temp_path, path)
        except Exception:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(temp_path)
            raise
        return path.resolve()

    def write_json(self, path: Path, data: Any) -> Path:
        return self.write_text(path, dumps_json(data))

    def write_csv(self, path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self.write_text(path, dumps_csv(header, rows))

    def read_json(self, path: Path) -> Any:
        """Read and decode a UTF-8 JSON file.

        Raises:
            OSError: If the file cannot be read
            UnicodeDecodeError: If the file is not UTF-8
            json.JSONDecodeError: If the content is not JSON
        """
        with open(path, encoding="utf-8") as f:
            return json.load(f)
