"""Path utilities: atomic writes, content digests, problem file discovery."""
from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

PROBLEM_SUFFIX = ".json"


def atomic_write_text(path: str | os.PathLike[str], text: str) -> str:
    """Write ``text`` to ``path`` atomically. Returns the path written."""
    path = os.fspath(path)
    # temp file -> fsync -> rename
    dir_path = os.path.dirname(os.path.abspath(path))
    os.makedirs(dir_path, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=dir_path, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    return path


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def digest_file(path: str | os.PathLike[str]) -> str:
    """SHA-256 of the file contents, prefixed with the algorithm name."""
    with open(path, "rb") as f:
        return digest_bytes(f.read())


def iter_problem_files(directory: str | os.PathLike[str]) -> list[Path]:
    """Problem files directly inside ``directory``, sorted by name."""
    root = Path(directory)
    return sorted(
        p for p in root.iterdir()
        if p.is_file() and p.suffix == PROBLEM_SUFFIX and not p.name.startswith(".")
    )
