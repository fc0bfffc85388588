"""Emulated outer secure layer wrapping inner records.

``none`` sends inner record bytes as-is. ``aes`` stands in for the certified
outer channel: each direction opens with a preamble ``"QO" | 0x01 | IV[16]``
and every byte after it is AES-256-CTR encrypted under the shared outer key,
with the counter continuing across frames.
"""

from __future__ import annotations

import os
from enum import Enum

from src.qppnest.crypto.aes_ref import BLOCK_SIZE, AesCtrStream, AesKey
from src.qppnest.errors import BadMagicError, BadVersionError, ParameterError

PREAMBLE_MAGIC = b"QO"
PREAMBLE_VERSION = 0x01
PREAMBLE_SIZE = len(PREAMBLE_MAGIC) + 1 + BLOCK_SIZE


class OuterMode(str, Enum):
    NONE = "none"
    AES = "aes"


class OuterLayer:
    """Per-connection outer wrapping; one instance per socket."""

    def __init__(self, mode: OuterMode, key: bytes | None = None) -> None:
        self.mode = OuterMode(mode)
        if self.mode is OuterMode.AES:
            if key is None:
                raise ParameterError("--outer aes needs an outer key file")
            self._key = AesKey.from_bytes(key)
        self._send: AesCtrStream | None = None
        self._recv: AesCtrStream | None = None

    @property
    def preamble_size(self) -> int:
        return PREAMBLE_SIZE if self.mode is OuterMode.AES else 0

    def make_preamble(self, iv: bytes | None = None) -> bytes:
        if self.mode is OuterMode.NONE:
            return b""
        iv = iv if iv is not None else os.urandom(BLOCK_SIZE)
        self._send = AesCtrStream(self._key, iv)
        return PREAMBLE_MAGIC + bytes([PREAMBLE_VERSION]) + iv

    def accept_preamble(self, preamble: bytes) -> None:
        if self.mode is OuterMode.NONE:
            return
        if preamble[:2] != PREAMBLE_MAGIC:
            raise BadMagicError("bad outer preamble magic")
        if preamble[2] != PREAMBLE_VERSION:
            raise BadVersionError(f"unsupported outer preamble version {preamble[2]}")
        self._recv = AesCtrStream(self._key, preamble[3:PREAMBLE_SIZE])

    def wrap(self, data: bytes) -> bytes:
        return self._send.process(data) if self._send else data

    def unwrap(self, data: bytes) -> bytes:
        return self._recv.process(data) if self._recv else data
