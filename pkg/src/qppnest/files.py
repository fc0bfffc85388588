"""File helpers for key files and bulk input/output."""

from __future__ import annotations

import os
from pathlib import Path

from src.qppnest.errors import ParameterError, QppIOError

KEY_SIZE = 32


def read_bytes(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise QppIOError(f"Cannot read {path}: {exc.strerror or exc}") from exc


def write_bytes(path: str | Path, data: bytes) -> None:
    """Write via a sibling temp file so a failed write never leaves half a file."""
    target = Path(path)
    tmp = target.with_name(f".{target.name}.tmp")
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(data)
        os.replace(tmp, target)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise QppIOError(f"Cannot write {path}: {exc.strerror or exc}") from exc


def read_key_file(path: str | Path) -> bytes:
    """Read a raw 32-byte key file."""
    key = read_bytes(path)
    if len(key) != KEY_SIZE:
        raise ParameterError(f"Key file {path} holds {len(key)} bytes, expected {KEY_SIZE}")
    return key


def write_key_file(path: str | Path, key: bytes) -> None:
    if len(key) != KEY_SIZE:
        raise ParameterError(f"Key must be {KEY_SIZE} bytes, got {len(key)}")
    write_bytes(path, key)
    try:
        os.chmod(path, 0o600)
    except OSError:
        pass


def iter_chunks(path: str | Path, chunk_size: int = 1 << 20):
    """Yield a file's contents in chunks."""
    try:
        with open(path, "rb") as fh:
            while chunk := fh.read(chunk_size):
                yield chunk
    except OSError as exc:
        raise QppIOError(f"Cannot read {path}: {exc.strerror or exc}") from exc
