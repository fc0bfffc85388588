"""Pluggable KEM interface and the insecure mock KEM used for demos and tests."""

from __future__ import annotations

import hashlib
from typing import Callable, Protocol, runtime_checkable

from src.qppnest.errors import InsecureKemError, ParameterError

MOCK_KEM_ID = 0xFE01


@runtime_checkable
class KemAlgorithm(Protocol):
    identifier: int
    public_key_size: int

    def keygen(self, seed: bytes) -> tuple[bytes, bytes]:
        """Return (public_key, secret_key)."""
        ...

    def encapsulate(self, public_key: bytes, seed: bytes) -> tuple[bytes, bytes]:
        """Return (ciphertext, shared_secret)."""
        ...

    def decapsulate(self, secret_key: bytes, ciphertext: bytes) -> bytes:
        ...


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


class MockKem:
    """INSECURE stand-in KEM: the shared secret is computable from public values.

    keygen(seed): sk = seed, pk = SHA-256(sk)
    encapsulate(pk, e): ct = e, ss = SHA-256(pk || ct)
    decapsulate(sk, ct) = SHA-256(SHA-256(sk) || ct)
    """

    identifier = MOCK_KEM_ID
    public_key_size = 32
    seed_size = 32

    def __init__(self, *, acknowledge_insecure: bool = False) -> None:
        self.acknowledged = acknowledge_insecure

    def _guard(self) -> None:
        if not self.acknowledged:
            raise InsecureKemError(
                "the mock KEM is insecure; pass --insecure-demo or set QPP_DEMO_ACK=1"
            )

    def _check_seed(self, seed: bytes) -> None:
        if len(seed) != self.seed_size:
            raise ParameterError(f"mock KEM seeds are {self.seed_size} bytes, got {len(seed)}")

    def keygen(self, seed: bytes) -> tuple[bytes, bytes]:
        self._guard()
        self._check_seed(seed)
        sk = bytes(seed)
        return _sha256(sk), sk

    def encapsulate(self, public_key: bytes, seed: bytes) -> tuple[bytes, bytes]:
        self._guard()
        self._check_seed(seed)
        ct = bytes(seed)
        return ct, _sha256(public_key + ct)

    def decapsulate(self, secret_key: bytes, ciphertext: bytes) -> bytes:
        self._guard()
        return _sha256(_sha256(secret_key) + ciphertext)


KEM_REGISTRY: dict[int, Callable[..., KemAlgorithm]] = {
    MOCK_KEM_ID: MockKem,
}


def kem_name(identifier: int) -> str:
    factory = KEM_REGISTRY.get(identifier)
    name = factory.__name__ if factory else "unknown"
    return f"{name} (0x{identifier:04x})"
