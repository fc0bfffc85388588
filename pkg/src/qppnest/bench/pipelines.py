"""Throughput measurements run by the benchmark graph.

Every pipeline processes the same buffer in record-sized chunks (record seq
= chunk index), runs once untimed on up to 1 MB as a warm-up, and reports
the best wall time over ``repeat`` runs.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from src.qppnest.bench.report import (
    AES_CTR,
    HANDSHAKE,
    MB,
    NESTED,
    OPENSSL_AES,
    QPP_DECRYPT,
    QPP_ENCRYPT,
    BenchRow,
)
from src.qppnest.channel.handshake import (
    ChannelConfig,
    client_confirm,
    client_finish,
    client_init,
    run_in_memory,
    server_respond,
)
from src.qppnest.channel.kem import MockKem
from src.qppnest.crypto.aes_ref import BLOCK_SIZE, AesKey, aes256_ctr
from src.qppnest.crypto.cipher import CipherSession, decrypt_record, encrypt_record
from src.qppnest.errors import HandshakeError, ParameterError

CHUNK_SIZE = MB
WARMUP_BYTES = MB

Chunk = tuple[int, int, bytes]


@dataclass
class BenchContext:
    """Inputs shared by all pipelines; built once per ``bench`` run."""

    data: bytes
    session_key: bytes
    aes_key: bytes
    iv: bytes
    n: int = 8
    m: int = 64
    repeat: int = 3
    threads: int = 1
    handshakes: int = 1000
    chunk_size: int = CHUNK_SIZE
    cipher: CipherSession = field(init=False, repr=False)
    aes: AesKey = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.repeat < 1 or self.threads < 1:
            raise ParameterError("--repeat and --threads must be at least 1")
        if self.chunk_size % BLOCK_SIZE:
            raise ParameterError("chunk size must be a multiple of the AES block size")
        self.cipher = CipherSession.from_session_key(self.session_key, self.n, self.m)
        self.aes = AesKey.from_bytes(self.aes_key)

    @classmethod
    def random(cls, size: int, **kwargs) -> "BenchContext":
        return cls(
            data=os.urandom(size),
            session_key=os.urandom(32),
            aes_key=os.urandom(32),
            iv=os.urandom(BLOCK_SIZE),
            **kwargs,
        )

    def chunks(self, data: bytes | None = None) -> list[Chunk]:
        data = self.data if data is None else data
        return [
            (index, offset, data[offset:offset + self.chunk_size])
            for index, offset in enumerate(range(0, len(data), self.chunk_size))
        ]


def _map_chunks(ctx: BenchContext, fn: Callable[[Chunk], bytes], chunks: list[Chunk]) -> list[bytes]:
    if ctx.threads == 1:
        return [fn(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
        return list(pool.map(fn, chunks))


def _best_time(ctx: BenchContext, run: Callable[[], object]) -> float:
    best = float("inf")
    for _ in range(ctx.repeat):
        t0 = time.perf_counter()
        run()
        best = min(best, time.perf_counter() - t0)
    return best


def _measure(ctx: BenchContext, name: str, fn: Callable[[Chunk], bytes], data: bytes | None = None, *, reference_only: bool = False) -> BenchRow:
    data = ctx.data if data is None else data
    _map_chunks(ctx, fn, ctx.chunks(data[:WARMUP_BYTES]))
    chunks = ctx.chunks(data)
    seconds = _best_time(ctx, lambda: _map_chunks(ctx, fn, chunks))
    return BenchRow(name, len(data), seconds, reference_only=reference_only)


def qpp_encrypt(ctx: BenchContext) -> BenchRow:
    return _measure(ctx, QPP_ENCRYPT, lambda c: encrypt_record(ctx.cipher, c[0], c[2]))


def qpp_decrypt(ctx: BenchContext) -> BenchRow:
    ciphertext = b"".join(encrypt_record(ctx.cipher, seq, chunk) for seq, _, chunk in ctx.chunks())
    return _measure(ctx, QPP_DECRYPT, lambda c: decrypt_record(ctx.cipher, c[0], c[2]), ciphertext)


def software_aes(ctx: BenchContext) -> BenchRow:
    return _measure(ctx, AES_CTR, lambda c: aes256_ctr(ctx.aes, ctx.iv, c[2], offset=c[1]))


def nested(ctx: BenchContext) -> BenchRow:
    """QPP first, then AES-256-CTR over the QPP output (inner then outer layer)."""

    def both(c: Chunk) -> bytes:
        return aes256_ctr(ctx.aes, ctx.iv, encrypt_record(ctx.cipher, c[0], c[2]), offset=c[1])

    return _measure(ctx, NESTED, both)


def _counter_at(iv: bytes, offset: int) -> bytes:
    value = (int.from_bytes(iv, "big") + offset // BLOCK_SIZE) % (1 << 128)
    return value.to_bytes(BLOCK_SIZE, "big")


def openssl_aes(ctx: BenchContext) -> BenchRow:
    """Platform AES-CTR (possibly hardware accelerated); never used in ratios."""

    def run(c: Chunk) -> bytes:
        encryptor = Cipher(algorithms.AES(ctx.aes_key), modes.CTR(_counter_at(ctx.iv, c[1]))).encryptor()
        return encryptor.update(c[2]) + encryptor.finalize()

    return _measure(ctx, OPENSSL_AES, run, reference_only=True)


def _handshake_seeds(count: int) -> list[tuple[bytes, bytes, bytes]]:
    seeds = []
    for i in range(count):
        base = i.to_bytes(8, "big")
        seeds.append(tuple(hashlib.sha256(label + base).digest() for label in (b"key", b"rnd", b"enc")))
    return seeds


def _handshake_wire_bytes(config: ChannelConfig, seeds: tuple[bytes, bytes, bytes]) -> int:
    client, hello = client_init(config, seeds[0])
    _, reply = server_respond(config, hello.encode(), seeds[1], seeds[2])
    client_finish(client, reply.encode())
    return len(hello.encode()) + len(reply.encode()) + len(client_confirm(client))


def handshakes(ctx: BenchContext) -> BenchRow:
    """In-memory mock-KEM handshake loop; ``bytes`` counts handshake messages produced."""
    # Keys never leave the process, so the mock KEM is acknowledged here.
    config = ChannelConfig(kems=(MockKem(acknowledge_insecure=True),), n=ctx.n, m=ctx.m)
    count = max(ctx.handshakes, 1)
    seeds = _handshake_seeds(count)
    for s in seeds[: min(count, 50)]:
        run_in_memory(config, config, s)

    def loop() -> None:
        for s in seeds:
            client_key, server_key = run_in_memory(config, config, s)
            if client_key != server_key:
                raise HandshakeError("handshake produced mismatched keys")

    seconds = _best_time(ctx, loop)
    return BenchRow(HANDSHAKE, _handshake_wire_bytes(config, seeds[0]) * count, seconds, operations=count)


PIPELINES: dict[str, Callable[[BenchContext], BenchRow]] = {
    QPP_ENCRYPT: qpp_encrypt,
    QPP_DECRYPT: qpp_decrypt,
    AES_CTR: software_aes,
    NESTED: nested,
    HANDSHAKE: handshakes,
    OPENSSL_AES: openssl_aes,
}
