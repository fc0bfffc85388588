"""Deterministic keystream and subkey derivation.

Subkeys come from HKDF-SHA-256 (RFC 5869) with an empty salt and a
domain-separation label as ``info``. The keystream is the RFC 8439 ChaCha20
keystream under (subkey, 12-byte nonce) with the block counter starting at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from src.qppnest.errors import ParameterError

SESSION_KEY_SIZE = 32
SUBKEY_SIZE = 32
NONCE_SIZE = 12
BLOCK_SIZE = 64

PAD_LABEL = b"QPP/pad/v1"
ENC_LABEL = b"QPP/enc/v1"

# Bytes fetched from the cipher per refill for small draws.
_REFILL = 4096


def hkdf_sha256(ikm: bytes, salt: bytes, info: bytes, length: int) -> bytes:
    """RFC 5869 HKDF with SHA-256. An empty salt means HashLen zero bytes."""
    return HKDF(
        algorithm=hashes.SHA256(),
        length=length,
        salt=salt or None,
        info=info,
    ).derive(ikm)


def check_session_key(session_key: bytes) -> bytes:
    if len(session_key) != SESSION_KEY_SIZE:
        raise ParameterError(
            f"session key must be {SESSION_KEY_SIZE} bytes, got {len(session_key)}"
        )
    return bytes(session_key)


def derive_subkey(session_key: bytes, label: bytes) -> bytes:
    """Expand the session key into an independent 32-byte subkey for ``label``."""
    return hkdf_sha256(check_session_key(session_key), b"", label, SUBKEY_SIZE)


@dataclass
class KeystreamState:
    """Position-addressed ChaCha20 keystream.

    Two states with equal (subkey, nonce, position) emit identical future
    bytes; a state may be created at any position.
    """

    subkey: bytes
    nonce: bytes
    position: int = 0
    _encryptor: object = field(init=False, repr=False, compare=False)
    _buffer: bytes = field(init=False, repr=False, compare=False, default=b"")
    _offset: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self) -> None:
        if len(self.subkey) != SUBKEY_SIZE:
            raise ParameterError(f"subkey must be {SUBKEY_SIZE} bytes, got {len(self.subkey)}")
        if len(self.nonce) != NONCE_SIZE:
            raise ParameterError(f"nonce must be {NONCE_SIZE} bytes, got {len(self.nonce)}")
        if self.position < 0:
            raise ParameterError("keystream position must be non-negative")
        counter, skip = divmod(self.position, BLOCK_SIZE)
        # cryptography's ChaCha20 takes a 16-byte nonce: LE 32-bit counter || RFC nonce
        full_nonce = counter.to_bytes(4, "little") + self.nonce
        self._encryptor = Cipher(algorithms.ChaCha20(self.subkey, full_nonce), mode=None).encryptor()
        if skip:
            self._encryptor.update(bytes(skip))

    def next_bytes(self, count: int) -> bytes:
        if count < 0:
            raise ParameterError("count must be non-negative")
        if count == 0:
            return b""
        buffered = len(self._buffer) - self._offset
        if buffered >= count:
            out = self._buffer[self._offset:self._offset + count]
            self._offset += count
        else:
            head = self._buffer[self._offset:]
            out = head + self._encryptor.update(bytes(count - buffered))
            self._buffer, self._offset = b"", 0
        self.position += count
        return out

    def next_byte(self) -> int:
        if self._offset >= len(self._buffer):
            self._buffer = self._encryptor.update(bytes(_REFILL))
            self._offset = 0
        b = self._buffer[self._offset]
        self._offset += 1
        self.position += 1
        return b

    def uniform_below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) by byte rejection sampling."""
        if not 1 <= bound <= 256:
            raise ParameterError(f"bound must be in [1, 256], got {bound}")
        limit = 256 - (256 % bound)
        while True:
            b = self.next_byte()
            if b < limit:
                return b % bound


def ks_init(subkey: bytes, nonce: bytes) -> KeystreamState:
    return KeystreamState(bytes(subkey), bytes(nonce))


def ks_next_bytes(state: KeystreamState, count: int) -> bytes:
    return state.next_bytes(count)


def ks_uniform_below(state: KeystreamState, bound: int) -> int:
    return state.uniform_below(bound)
