"""JSONL reading/writing with provenance headers.

Output files start with a single header line ``{"_header": {...}}`` carrying
the tool version, the hash of the effective configuration, and the seed.
Readers skip header lines transparently.  Serialization is canonical
(sorted keys, fixed separators) so identical runs produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Iterator

TOOL_NAME = "genaug"
TOOL_VERSION = "0.1.0"


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict[str, Any]) -> str:
    return hashlib.sha256(dumps(config).encode("utf-8")).hexdigest()[:16]


def make_header(config: dict[str, Any], seed: int | None = None) -> dict[str, Any]:
    header: dict[str, Any] = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "config_hash": config_hash(config),
    }
    if seed is not None:
        header["seed"] = seed
    return header


def read_records(path: str | Path) -> Iterator[dict[str, Any]]:
    """Yield record dicts from a JSONL file, skipping header lines."""
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if isinstance(obj, dict) and "_header" in obj:
                continue
            if not isinstance(obj, dict):
                raise ValueError(f"{path}:{lineno}: expected a JSON object")
            yield obj


def write_records(
    path: str | Path,
    records: Iterable[dict[str, Any]],
    header: dict[str, Any] | None = None,
) -> int:
    """Write records as JSONL, prefixed with a header line when given."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        if header is not None:
            handle.write(dumps({"_header": header}) + "\n")
        for record in records:
            handle.write(dumps(record) + "\n")
            count += 1
    return count
