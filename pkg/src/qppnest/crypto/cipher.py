"""QPP record encryption: XOR pre-randomisation, dispatch, gate lookup.

Each plaintext byte consumes two keystream bytes, r0 (mask) then r1
(dispatch). With n=8 the byte is one symbol; with n=4 the high and low
nibbles are separate symbols, using the high/low nibbles of r0 and r1.
Every record gets its own keystream: nonce = 4 zero bytes || seq (u64 BE).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.qppnest.crypto.keystream import ENC_LABEL, derive_subkey, ks_init
from src.qppnest.crypto.pad import QppPad, generate_pad
from src.qppnest.errors import ParameterError

MAX_SEQ = (1 << 64) - 1


def record_nonce(seq: int) -> bytes:
    if not 0 <= seq <= MAX_SEQ:
        raise ParameterError(f"sequence number {seq} does not fit in 64 bits")
    return bytes(4) + seq.to_bytes(8, "big")


@dataclass(frozen=True)
class CipherSession:
    """Immutable pad plus record-encryption subkey; safe to share across threads."""

    pad: QppPad
    enc_subkey: bytes

    @classmethod
    def from_session_key(
        cls,
        session_key: bytes,
        n: int = 8,
        m: int = 64,
        *,
        label: bytes = ENC_LABEL,
        pad: QppPad | None = None,
    ) -> "CipherSession":
        if pad is None:
            pad = generate_pad(session_key, n, m)
        return cls(pad=pad, enc_subkey=derive_subkey(session_key, label))

    def masks(self, seq: int, length: int) -> tuple[np.ndarray, np.ndarray]:
        """Interleaved (r0, r1) keystream bytes for ``length`` symbols of record ``seq``."""
        ks = ks_init(self.enc_subkey, record_nonce(seq))
        stream = np.frombuffer(ks.next_bytes(2 * length), dtype=np.uint8)
        return stream[0::2], stream[1::2]


def encrypt_record(session: CipherSession, seq: int, plaintext: bytes) -> bytes:
    if not plaintext:
        record_nonce(seq)
        return b""
    pad = session.pad
    # M is a power of two dividing 2^n, so masking equals r mod M
    mask = pad.m - 1
    p = np.frombuffer(plaintext, dtype=np.uint8)
    r0, r1 = session.masks(seq, p.size)
    if pad.n == 8:
        return pad.gates[r1 & mask, p ^ r0].tobytes()
    hi = pad.gates[(r1 >> 4) & mask, (p >> 4) ^ (r0 >> 4)]
    lo = pad.gates[(r1 & 0x0F) & mask, (p & 0x0F) ^ (r0 & 0x0F)]
    return ((hi << 4) | lo).tobytes()


def decrypt_record(session: CipherSession, seq: int, ciphertext: bytes) -> bytes:
    if not ciphertext:
        record_nonce(seq)
        return b""
    pad = session.pad
    mask = pad.m - 1
    c = np.frombuffer(ciphertext, dtype=np.uint8)
    r0, r1 = session.masks(seq, c.size)
    if pad.n == 8:
        return (pad.inverse_gates[r1 & mask, c] ^ r0).tobytes()
    hi = pad.inverse_gates[(r1 >> 4) & mask, c >> 4] ^ (r0 >> 4)
    lo = pad.inverse_gates[(r1 & 0x0F) & mask, c & 0x0F] ^ (r0 & 0x0F)
    return ((hi << 4) | lo).tobytes()
