"""Shared fixtures and straight-line reference implementations.

The reference functions below are written directly from RFC 8439 (ChaCha20)
and RFC 5869 (HKDF) and share no code with the library; golden values are
checked against them.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import struct

import pytest

from src.qppnest.channel.handshake import ChannelConfig
from src.qppnest.channel.kem import MockKem
from src.qppnest.config import Settings

FUZZ_ITERATIONS = int(os.environ.get("QPP_FUZZ_ITERATIONS", "10000"))
TUNNEL_BYTES = int(os.environ.get("QPP_TUNNEL_BYTES", str(1 << 20)))

_MASK32 = 0xFFFFFFFF


def _rotl(v: int, c: int) -> int:
    return ((v << c) & _MASK32) | (v >> (32 - c))


def _quarter_round(s: list[int], a: int, b: int, c: int, d: int) -> None:
    s[a] = (s[a] + s[b]) & _MASK32
    s[d] = _rotl(s[d] ^ s[a], 16)
    s[c] = (s[c] + s[d]) & _MASK32
    s[b] = _rotl(s[b] ^ s[c], 12)
    s[a] = (s[a] + s[b]) & _MASK32
    s[d] = _rotl(s[d] ^ s[a], 8)
    s[c] = (s[c] + s[d]) & _MASK32
    s[b] = _rotl(s[b] ^ s[c], 7)


def chacha20_block(key: bytes, counter: int, nonce: bytes) -> bytes:
    state = (
        [0x61707865, 0x3320646E, 0x79622D32, 0x6B206574]
        + list(struct.unpack("<8I", key))
        + [counter]
        + list(struct.unpack("<3I", nonce))
    )
    w = state[:]
    for _ in range(10):
        _quarter_round(w, 0, 4, 8, 12)
        _quarter_round(w, 1, 5, 9, 13)
        _quarter_round(w, 2, 6, 10, 14)
        _quarter_round(w, 3, 7, 11, 15)
        _quarter_round(w, 0, 5, 10, 15)
        _quarter_round(w, 1, 6, 11, 12)
        _quarter_round(w, 2, 7, 8, 13)
        _quarter_round(w, 3, 4, 9, 14)
    return struct.pack("<16I", *((w[i] + state[i]) & _MASK32 for i in range(16)))


def chacha20_stream(key: bytes, nonce: bytes, length: int) -> bytes:
    out = b""
    counter = 0
    while len(out) < length:
        out += chacha20_block(key, counter, nonce)
        counter += 1
    return out[:length]


def hkdf_reference(ikm: bytes, salt: bytes, info: bytes, length: int) -> bytes:
    prk = hmac.new(salt or bytes(32), ikm, hashlib.sha256).digest()
    okm, block, i = b"", b"", 1
    while len(okm) < length:
        block = hmac.new(prk, block + info + bytes([i]), hashlib.sha256).digest()
        okm += block
        i += 1
    return okm[:length]


class ReferenceStream:
    """Byte-at-a-time keystream over :func:`chacha20_block`."""

    def __init__(self, key: bytes, nonce: bytes) -> None:
        self.key, self.nonce = key, nonce
        self.counter = 0
        self.buf = b""

    def byte(self) -> int:
        if not self.buf:
            self.buf = chacha20_block(self.key, self.counter, self.nonce)
            self.counter += 1
        b, self.buf = self.buf[0], self.buf[1:]
        return b

    def below(self, bound: int) -> int:
        limit = 256 - 256 % bound
        while True:
            b = self.byte()
            if b < limit:
                return b % bound


def reference_pad(session_key: bytes, n: int, m: int) -> list[list[int]]:
    stream = ReferenceStream(hkdf_reference(session_key, b"", b"QPP/pad/v1", 32), bytes(12))
    gates = []
    for _ in range(m):
        a = list(range(1 << n))
        for i in range((1 << n) - 1, 0, -1):
            j = stream.below(i + 1)
            a[i], a[j] = a[j], a[i]
        gates.append(a)
    return gates


def reference_encrypt(session_key: bytes, n: int, m: int, seq: int, plaintext: bytes, label: bytes = b"QPP/enc/v1") -> bytes:
    gates = reference_pad(session_key, n, m)
    subkey = hkdf_reference(session_key, b"", label, 32)
    ks = chacha20_stream(subkey, bytes(4) + seq.to_bytes(8, "big"), 2 * len(plaintext))
    out = bytearray()
    for i, p in enumerate(plaintext):
        r0, r1 = ks[2 * i], ks[2 * i + 1]
        if n == 8:
            out.append(gates[r1 % m][p ^ r0])
        else:
            hi = gates[(r1 >> 4) % m][(p >> 4) ^ (r0 >> 4)]
            lo = gates[(r1 & 0x0F) % m][(p & 0x0F) ^ (r0 & 0x0F)]
            out.append((hi << 4) | lo)
    return bytes(out)


@pytest.fixture
def session_key() -> bytes:
    return bytes(range(32))


@pytest.fixture
def mock_kem() -> MockKem:
    return MockKem(acknowledge_insecure=True)


@pytest.fixture
def channel_config(mock_kem) -> ChannelConfig:
    return ChannelConfig(kems=(mock_kem,))


@pytest.fixture
def clean_env(monkeypatch):
    """Remove every QPP_* variable so defaults are observable."""
    for name in list(os.environ):
        if name.startswith("QPP_"):
            monkeypatch.delenv(name, raising=False)
    return monkeypatch


@pytest.fixture
def demo_settings(clean_env) -> Settings:
    return Settings.from_env(insecure_demo=True, read_timeout=10.0)
