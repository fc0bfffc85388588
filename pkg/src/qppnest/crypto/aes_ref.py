"""Portable software AES-256 (FIPS 197) in CTR mode (SP 800-38A).

Table-based: four 32-bit T-tables fold SubBytes, ShiftRows and MixColumns
into lookups, and numpy evaluates them across many counter blocks at once.
No hardware acceleration is used; this is the software baseline the
benchmark compares QPP against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.qppnest.errors import ParameterError

KEY_SIZE = 32
BLOCK_SIZE = 16
ROUNDS = 14

# Blocks processed per numpy pass, bounds temporary memory.
_CHUNK_BLOCKS = 1 << 16


def _xtime(a: int) -> int:
    a <<= 1
    return (a ^ 0x11B) if a & 0x100 else a


def _build_sbox() -> list[int]:
    # log/antilog tables over GF(2^8) with generator 3
    exp = [0] * 255
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x ^= _xtime(x)
    sbox = [0] * 256
    for a in range(256):
        inv = 0 if a == 0 else exp[(255 - log[a]) % 255]
        s = inv
        for shift in range(1, 5):
            s ^= ((inv << shift) | (inv >> (8 - shift))) & 0xFF
        sbox[a] = s ^ 0x63
    return sbox


SBOX = _build_sbox()


def _build_tables() -> tuple[np.ndarray, ...]:
    t0 = []
    for s in SBOX:
        s2 = _xtime(s)
        s3 = s2 ^ s
        t0.append((s2 << 24) | (s << 16) | (s << 8) | s3)
    t0 = np.array(t0, dtype=np.uint32)
    t1 = (t0 >> 8) | (t0 << 24)
    t2 = (t0 >> 16) | (t0 << 16)
    t3 = (t0 >> 24) | (t0 << 8)
    return t0, t1, t2, t3


T0, T1, T2, T3 = _build_tables()
_SBOX_NP = np.array(SBOX, dtype=np.uint32)
_RCON = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40]


def _sub_word(w: int) -> int:
    return (
        (SBOX[(w >> 24) & 0xFF] << 24)
        | (SBOX[(w >> 16) & 0xFF] << 16)
        | (SBOX[(w >> 8) & 0xFF] << 8)
        | SBOX[w & 0xFF]
    )


def expand_key(key: bytes) -> list[int]:
    """FIPS 197 key expansion for AES-256: 60 words, 15 round keys."""
    if len(key) != KEY_SIZE:
        raise ParameterError(f"AES-256 key must be {KEY_SIZE} bytes, got {len(key)}")
    nk = 8
    w = [int.from_bytes(key[4 * i:4 * i + 4], "big") for i in range(nk)]
    for i in range(nk, 4 * (ROUNDS + 1)):
        temp = w[i - 1]
        if i % nk == 0:
            temp = ((temp << 8) | (temp >> 24)) & 0xFFFFFFFF
            temp = _sub_word(temp) ^ (_RCON[i // nk - 1] << 24)
        elif i % nk == 4:
            temp = _sub_word(temp)
        w.append(w[i - nk] ^ temp)
    return w


@dataclass(frozen=True)
class AesKey:
    key: bytes
    round_words: tuple[int, ...]

    @classmethod
    def from_bytes(cls, key: bytes) -> "AesKey":
        return cls(key=bytes(key), round_words=tuple(expand_key(key)))

    @property
    def round_keys(self) -> list[bytes]:
        words = self.round_words
        return [
            b"".join(words[4 * r + c].to_bytes(4, "big") for c in range(4))
            for r in range(ROUNDS + 1)
        ]


def _encrypt_columns(rk: tuple[int, ...], s0, s1, s2, s3):
    s0 = s0 ^ np.uint32(rk[0])
    s1 = s1 ^ np.uint32(rk[1])
    s2 = s2 ^ np.uint32(rk[2])
    s3 = s3 ^ np.uint32(rk[3])
    for r in range(1, ROUNDS):
        k = 4 * r
        t0 = T0[s0 >> 24] ^ T1[(s1 >> 16) & 0xFF] ^ T2[(s2 >> 8) & 0xFF] ^ T3[s3 & 0xFF] ^ np.uint32(rk[k])
        t1 = T0[s1 >> 24] ^ T1[(s2 >> 16) & 0xFF] ^ T2[(s3 >> 8) & 0xFF] ^ T3[s0 & 0xFF] ^ np.uint32(rk[k + 1])
        t2 = T0[s2 >> 24] ^ T1[(s3 >> 16) & 0xFF] ^ T2[(s0 >> 8) & 0xFF] ^ T3[s1 & 0xFF] ^ np.uint32(rk[k + 2])
        t3 = T0[s3 >> 24] ^ T1[(s0 >> 16) & 0xFF] ^ T2[(s1 >> 8) & 0xFF] ^ T3[s2 & 0xFF] ^ np.uint32(rk[k + 3])
        s0, s1, s2, s3 = t0, t1, t2, t3
    k = 4 * ROUNDS
    sb = _SBOX_NP

    def last(a, b, c, d, word):
        return (
            (sb[a >> 24] << 24)
            | (sb[(b >> 16) & 0xFF] << 16)
            | (sb[(c >> 8) & 0xFF] << 8)
            | sb[d & 0xFF]
        ) ^ np.uint32(word)

    return (
        last(s0, s1, s2, s3, rk[k]),
        last(s1, s2, s3, s0, rk[k + 1]),
        last(s2, s3, s0, s1, rk[k + 2]),
        last(s3, s0, s1, s2, rk[k + 3]),
    )


def encrypt_blocks(key: AesKey, blocks: bytes) -> bytes:
    """ECB-encrypt whole 16-byte blocks (used for known-answer checks and CTR)."""
    if len(blocks) % BLOCK_SIZE:
        raise ParameterError("input must be a multiple of the AES block size")
    words = np.frombuffer(blocks, dtype=">u4").astype(np.uint32).reshape(-1, 4)
    out = _encrypt_columns(key.round_words, words[:, 0], words[:, 1], words[:, 2], words[:, 3])
    return np.stack(out, axis=1).astype(">u4").tobytes()


def _counter_blocks(iv: int, start: int, count: int) -> tuple[np.ndarray, ...]:
    base = (iv + start) % (1 << 128)
    hi, lo = base >> 64, base & ((1 << 64) - 1)
    low = np.uint64(lo) + np.arange(count, dtype=np.uint64)
    high = np.uint64(hi) + (low < np.uint64(lo)).astype(np.uint64)
    mask = np.uint64(0xFFFFFFFF)
    return (
        (high >> np.uint64(32)).astype(np.uint32),
        (high & mask).astype(np.uint32),
        (low >> np.uint64(32)).astype(np.uint32),
        (low & mask).astype(np.uint32),
    )


def ctr_keystream(key: AesKey, iv: bytes, offset: int, length: int) -> bytes:
    """Keystream bytes [offset, offset + length) for counter block ``iv``."""
    if len(iv) != BLOCK_SIZE:
        raise ParameterError(f"CTR counter block must be {BLOCK_SIZE} bytes, got {len(iv)}")
    if length <= 0:
        return b""
    iv_int = int.from_bytes(iv, "big")
    first, skip = divmod(offset, BLOCK_SIZE)
    nblocks = -(-(skip + length) // BLOCK_SIZE)
    parts = []
    for start in range(0, nblocks, _CHUNK_BLOCKS):
        count = min(_CHUNK_BLOCKS, nblocks - start)
        cols = _encrypt_columns(key.round_words, *_counter_blocks(iv_int, first + start, count))
        parts.append(np.stack(cols, axis=1).astype(">u4").tobytes())
    stream = b"".join(parts)
    return stream[skip:skip + length]


def aes256_ctr(key: AesKey | bytes, iv: bytes, data: bytes, *, offset: int = 0) -> bytes:
    """CTR encryption and decryption are the same operation.

    ``offset`` positions ``data`` inside the stream, so a buffer can be
    processed in independent chunks.
    """
    if not isinstance(key, AesKey):
        key = AesKey.from_bytes(key)
    if not data:
        if len(iv) != BLOCK_SIZE:
            raise ParameterError(f"CTR counter block must be {BLOCK_SIZE} bytes, got {len(iv)}")
        return b""
    stream = np.frombuffer(ctr_keystream(key, iv, offset, len(data)), dtype=np.uint8)
    return (np.frombuffer(data, dtype=np.uint8) ^ stream).tobytes()


class AesCtrStream:
    """Continuous CTR stream for one direction of a connection."""

    def __init__(self, key: AesKey | bytes, iv: bytes) -> None:
        self._key = key if isinstance(key, AesKey) else AesKey.from_bytes(key)
        self._iv = bytes(iv)
        self.offset = 0

    def process(self, data: bytes) -> bytes:
        if not data:
            return b""
        stream = ctr_keystream(self._key, self._iv, self.offset, len(data))
        self.offset += len(data)
        return (np.frombuffer(data, dtype=np.uint8) ^ np.frombuffer(stream, dtype=np.uint8)).tobytes()
