"""Lossless CSV tables, versioned JSON documents and run manifests.

CSV layout::

    # homodyne-pointer-lab v0.1.0
    name_a,name_b
    <17 significant digits>,<17 significant digits>

Seventeen significant digits round-trip every double, so parsing a written
table and writing it again reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__

CSV_MAGIC = "# homodyne-pointer-lab v"
SCHEMA_VERSION = 1
NUMBER_FORMAT = "%.17g"


class FormatError(ValueError):
    pass


def format_csv(columns: Mapping[str, np.ndarray], version: str = __version__) -> str:
    names = list(columns)
    if not names:
        raise ValueError("at least one column is required")
    for name in names:
        if "," in name or "\n" in name:
            raise ValueError(f"column name {name!r} contains a separator")
    data = np.column_stack([np.asarray(columns[n], dtype=float).ravel() for n in names])
    lines = [CSV_MAGIC + version, ",".join(names)]
    lines.extend(",".join(NUMBER_FORMAT % v for v in row) for row in data)
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> tuple[str, dict[str, np.ndarray]]:
    """Inverse of :func:`format_csv`; returns (version, columns)."""
    lines = text.splitlines()
    if len(lines) < 2 or not lines[0].startswith(CSV_MAGIC):
        raise FormatError("missing homodyne-pointer-lab header line")
    version = lines[0][len(CSV_MAGIC) :]
    names = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    for i, row in enumerate(rows):
        if len(row) != len(names):
            raise FormatError(f"row {i + 1} has {len(row)} fields, expected {len(names)}")
    data = np.array([[float(v) for v in row] for row in rows], dtype=float).reshape(len(rows), len(names))
    return version, {n: data[:, j] for j, n in enumerate(names)}


def write_csv(path, columns: Mapping[str, np.ndarray]) -> Path:
    path = Path(path)
    path.write_text(format_csv(columns), encoding="ascii", newline="\n")
    return path


def read_csv(path) -> tuple[str, dict[str, np.ndarray]]:
    return parse_csv(Path(path).read_text(encoding="ascii"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def json_document(kind: str, payload: Mapping) -> dict:
    """Wrap ``payload`` with the schema header shared by all JSON output."""
    return {
        "schema": f"homodyne-pointer-lab/{kind}",
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        **_jsonable(dict(payload)),
    }


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


@dataclass
class RunManifest:
    command: str
    parameters: dict
    artifact_version: str = __version__
    seed: int | None = None
    outputs: list[str] = field(default_factory=list)

    def missing_outputs(self) -> list[str]:
        return [p for p in self.outputs if not os.path.exists(p)]

    def to_json(self) -> str:
        return dumps(json_document("manifest", asdict(self)))
