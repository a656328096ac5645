from __future__ import annotations

import gzip
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def make_event(type_: str, repo: str, action: str | None = None,
               actor: str = "alice") -> dict:
    record = {
        "id": "1",
        "type": type_,
        "actor": {"login": actor},
        "repo": {"name": repo},
        "payload": {},
        "created_at": "2026-01-01T00:30:00Z",
    }
    if action is not None:
        record["payload"]["action"] = action
    return record


def gzip_ndjson(records, extra_lines: list[str] | None = None) -> bytes:
    lines = [json.dumps(r) for r in records]
    if extra_lines:
        lines.extend(extra_lines)
    return gzip.compress(("\n".join(lines) + "\n").encode("utf-8"))


def write_universe(path: Path, rows: list[tuple[str, int]]) -> Path:
    text = "repo,stars\n" + "".join(f"{name},{stars}\n" for name, stars in rows)
    path.write_text(text, encoding="utf-8")
    return path
