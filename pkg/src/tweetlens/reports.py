"""Versioned JSON artifacts and plain-text tables."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

SCHEMA_VERSION = 1


class ArtifactError(RuntimeError):
    """A required upstream artifact is missing or unreadable."""


def _clean(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) or math.isinf(obj) else obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def write_json(path: Path, kind: str, payload: dict) -> Path:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **payload}
    path.write_text(json.dumps(_clean(doc), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def read_json(path: Path, kind: str | None = None, hint: str = "") -> dict:
    if not path.is_file():
        raise ArtifactError(f"{path.name} not found in {path.parent}" + (f"; {hint}" if hint else ""))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: not valid JSON ({exc.msg})") from None
    version = doc.get("schema_version")
    if not isinstance(version, int):
        raise ArtifactError(f"{path}: missing schema_version")
    if version > SCHEMA_VERSION:
        raise ArtifactError(f"{path}: schema_version {version} is newer than supported ({SCHEMA_VERSION})")
    if kind is not None and doc.get("kind") != kind:
        raise ArtifactError(f"{path}: expected a {kind!r} artifact, found {doc.get('kind')!r}")
    return doc


def fmt(v, digits: int = 4) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        if math.isnan(v):
            return "n/a"
        if v != 0.0 and (abs(v) < 10 ** -digits or abs(v) >= 1e6):
            return f"{v:.{digits - 1}e}"
        return f"{v:.{digits}f}"
    return str(v)


def text_table(headers: Sequence[str], rows: Sequence[Sequence], digits: int = 4) -> str:
    cells = [[fmt(c, digits) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)
    return "\n".join(lines)


def write_text(path: Path, sections: Sequence[tuple[str, str]]) -> Path:
    parts = []
    for title, body in sections:
        parts.append(f"== {title} ==\n{body}\n")
    path.write_text("\n".join(parts), encoding="utf-8")
    return path
