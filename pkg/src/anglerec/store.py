"""JSONL / JSON persistence with a schema-version envelope.

Every record written by this package carries a ``schema_version`` field so
that readers can reject files produced by an incompatible version instead of
misparsing them. Floats go through ``json`` which serializes the shortest
round-trip decimal representation.
"""

from __future__ import annotations

import json
import os
from typing import Any, Iterable, Iterator

from .errors import SchemaError

SCHEMA_VERSION = 1


def _check_version(obj: dict, path: str) -> None:
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: schema_version {version!r} does not match expected {SCHEMA_VERSION}"
        )


def write_jsonl(path: str, records: Iterable[dict]) -> int:
    """Write records as one JSON object per line; returns the record count."""
    count = 0
    with open(path, "w") as fh:
        for rec in records:
            rec = dict(rec)
            rec.setdefault("schema_version", SCHEMA_VERSION)
            fh.write(json.dumps(rec) + "\n")
            count += 1
    return count


def append_jsonl(path: str, record: dict) -> None:
    record = dict(record)
    record.setdefault("schema_version", SCHEMA_VERSION)
    with open(path, "a") as fh:
        fh.write(json.dumps(record) + "\n")


def read_jsonl(path: str) -> Iterator[dict]:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            _check_version(obj, path)
            yield obj


def write_json(path: str, obj: dict) -> None:
    obj = dict(obj)
    obj.setdefault("schema_version", SCHEMA_VERSION)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        obj = json.load(fh)
    _check_version(obj, path)
    return obj


def write_run_config(out_path: str, config: dict[str, Any]) -> None:
    """Persist the resolved configuration next to an output file."""
    write_json(out_path + ".config.json", {"config": config})


def exists_nonempty(path: str) -> bool:
    return os.path.exists(path) and os.path.getsize(path) > 0
