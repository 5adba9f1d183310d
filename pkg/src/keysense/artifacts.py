"""Run manifests and the on-disk artifact store.

A run is identified by the hash of its effective configuration plus the
content digest of the cleaned corpus.  Every emitted file embeds that
hash (a leading ``# manifest=`` comment for CSV, a ``manifest_hash`` key
for JSON) so downstream stages can refuse inputs produced under different
settings.  Identical manifest and corpus digest must yield byte-identical
artifacts, so nothing time- or machine-dependent is ever written here;
stage timings go to the log stream instead.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ArtifactError

TOOL_NAME = "keysense"


def _canonical_json(payload: object) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class RunManifest:
    """Deterministic identity of one pipeline run."""

    version: str
    config: Mapping[str, object]
    input_digest: str

    @property
    def hash(self) -> str:
        body = _canonical_json(
            {
                "tool": TOOL_NAME,
                "version": self.version,
                "config": dict(self.config),
                "input_digest": self.input_digest,
            }
        )
        return hashlib.sha256(body.encode("utf-8")).hexdigest()

    def to_json(self) -> str:
        payload = {
            "tool": TOOL_NAME,
            "version": self.version,
            "config": dict(self.config),
            "input_digest": self.input_digest,
            "manifest_hash": self.hash,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "RunManifest":
        payload = json.loads(text)
        manifest = RunManifest(
            version=payload["version"],
            config=payload["config"],
            input_digest=payload["input_digest"],
        )
        if manifest.hash != payload.get("manifest_hash"):
            raise ArtifactError("manifest file is internally inconsistent")
        return manifest


def format_value(value: object) -> str:
    """Stable text form for CSV cells; None becomes the empty marker."""
    if value is None:
        return ""
    if isinstance(value, float):
        # plain-float repr is the shortest round-trip form; numpy scalars
        # would otherwise print as np.float64(...)
        return repr(float(value))
    return str(value)


def write_table(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    manifest_hash: str,
    schema: str,
    meta: Mapping[str, object] | None = None,
) -> Path:
    """Write a CSV artifact with embedded manifest hash and schema tag."""
    path = Path(path)
    buf = io.StringIO()
    buf.write(f"# manifest={manifest_hash}\n")
    buf.write(f"# schema={schema}\n")
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={format_value(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(cell) for cell in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_table(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Read one of our CSV artifacts back: (comment metadata, string rows)."""
    path = Path(path)
    meta: dict[str, str] = {}
    body_lines: list[str] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        elif line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key] = value
        else:
            body_lines.append(line)
    reader = csv.DictReader(body_lines)
    return meta, list(reader)


def read_column(path: str | Path, column: str) -> list[float]:
    """Numeric column from a CSV artifact, skipping empty-marker cells."""
    meta, rows = read_table(path)
    if not rows or column not in rows[0]:
        available = ", ".join(rows[0].keys()) if rows else "(no rows)"
        raise ArtifactError(f"column {column!r} not found; available: {available}")
    values = []
    for row in rows:
        cell = row[column]
        if cell != "":
            values.append(float(cell))
    if not values:
        raise ArtifactError(f"column {column!r} is empty")
    return values


def write_json(
    path: str | Path, payload: dict, manifest_hash: str
) -> Path:
    path = Path(path)
    body = dict(payload)
    body["manifest_hash"] = manifest_hash
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def verify_artifact_hash(
    path: str | Path, expected_hash: str, meta: Mapping[str, str]
) -> None:
    found = meta.get("manifest")
    if found != expected_hash:
        raise ArtifactError(
            f"{path} was produced under manifest {found}, expected {expected_hash}; "
            "re-run the upstream stage with matching flags"
        )


@dataclass
class StageTimings:
    """Wall-clock per stage, reported on the log stream only."""

    entries: list[tuple[str, float]] = field(default_factory=list)

    def add(self, stage: str, seconds: float) -> None:
        self.entries.append((stage, seconds))

    def summary(self) -> str:
        return "; ".join(f"{stage}={seconds:.3f}s" for stage, seconds in self.entries)
