"""Deterministic CSV/JSON rendering and atomic file writes."""

import io
import json
import logging
import os
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

import aiofiles
import aiofiles.os

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return "%.17g" % float(value)


def csv_table(columns: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_value(row[c]) for c in columns) + "\n")
    return buf.getvalue()


def json_summary(command: str, config: dict, checks: Mapping[str, Mapping], extra: dict | None = None) -> str:
    """Render a schema-1 summary; `passed` is true iff every check passed."""
    doc = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "checks": dict(checks),
        "passed": all(c["passed"] for c in checks.values()),
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


async def write_atomic(path: Path, text: str) -> Path:
    """Write `text` to a temporary sibling and move it over `path`."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    async with aiofiles.open(tmp, "w") as f:
        await f.write(text)
    await aiofiles.os.replace(tmp, path)
    logger.debug(f"Wrote {path}")
    return path


async def write_all(out_dir: Path, files: Mapping[str, str]) -> list[Path]:
    """Write every `name -> text` entry below `out_dir`, sorted by name."""
    return [await write_atomic(out_dir / name, files[name]) for name in sorted(files)]
