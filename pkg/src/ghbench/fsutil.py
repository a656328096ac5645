"""Small filesystem and hashing helpers shared by the pipeline stages."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename over.

    os.replace is atomic on POSIX, so readers and concurrent writers never
    observe a half-written file; last writer wins with identical content for
    identical inputs.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Path) -> str | None:
    """Content hash, or None when the file is absent."""
    try:
        return sha256_bytes(Path(path).read_bytes())
    except FileNotFoundError:
        return None


def canonical_json(obj) -> str:
    """Key-sorted, whitespace-free JSON; the hashing serialization."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def hash_inputs(obj) -> str:
    return sha256_bytes(canonical_json(obj).encode("utf-8"))
