"""Permutation pad generation, inversion and the ``QPPD`` debug export format.

A pad is M secret permutation gates over 2^n symbols, expanded from the
session key with a Fisher-Yates shuffle driven by the pad keystream.
Gates are stored as numpy rows so encryption can dispatch with fancy
indexing; the inverse rows are kept alongside for decryption.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from src.qppnest.crypto.keystream import NONCE_SIZE, PAD_LABEL, derive_subkey, ks_init
from src.qppnest.errors import DecodeError, ParameterError, ValidationError

SUPPORTED_N = (4, 8)

PAD_MAGIC = b"QPPD"
PAD_FORMAT_VERSION = 0x01
_PAD_HEADER = struct.Struct(">4sBBH")


def validate_pad_params(n: int, m: int) -> None:
    """Raise ParameterError unless M >= 1 divides 2^n (n in {4, 8})."""
    if n not in SUPPORTED_N:
        raise ParameterError(f"n must be one of {SUPPORTED_N}, got {n}")
    size = 1 << n
    if m < 1:
        raise ParameterError(f"M must be at least 1, got {m}")
    if size % m:
        raise ParameterError(
            f"M={m} must divide {size} for n={n} so that gate dispatch by modulo is unbiased"
        )


def invert_gate(gate) -> np.ndarray:
    """Return ``inv`` with ``inv[gate[x]] == x``; rejects non-bijections."""
    arr = np.asarray(gate)
    if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
        raise ValidationError("a gate must be a one-dimensional integer array")
    size = arr.shape[0]
    if size == 0 or not np.array_equal(np.sort(arr), np.arange(size)):
        raise ValidationError("gate is not a bijection")
    inv = np.empty_like(arr)
    inv[arr] = np.arange(size, dtype=arr.dtype)
    return inv


@dataclass(frozen=True, eq=False)
class QppPad:
    n: int
    m: int
    gates: np.ndarray
    inverse_gates: np.ndarray

    def __post_init__(self) -> None:
        validate_pad_params(self.n, self.m)
        shape = (self.m, 1 << self.n)
        if self.gates.shape != shape or self.inverse_gates.shape != shape:
            raise ValidationError(f"pad arrays must have shape {shape}")
        self.gates.setflags(write=False)
        self.inverse_gates.setflags(write=False)

    @property
    def size(self) -> int:
        return 1 << self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QppPad):
            return NotImplemented
        return (self.n, self.m) == (other.n, other.m) and np.array_equal(self.gates, other.gates)

    __hash__ = None

    @classmethod
    def from_gates(cls, n: int, gates: np.ndarray) -> "QppPad":
        gates = np.ascontiguousarray(gates, dtype=np.uint8)
        inverse = np.stack([invert_gate(g) for g in gates]).astype(np.uint8)
        return cls(n=n, m=gates.shape[0], gates=gates, inverse_gates=inverse)


def _fisher_yates(ks, size: int) -> list[int]:
    a = list(range(size))
    for i in range(size - 1, 0, -1):
        j = ks.uniform_below(i + 1)
        a[i], a[j] = a[j], a[i]
    return a


def generate_pad(session_key: bytes, n: int, m: int) -> QppPad:
    """Expand ``session_key`` into M gates from one continuous pad keystream."""
    validate_pad_params(n, m)
    ks = ks_init(derive_subkey(session_key, PAD_LABEL), bytes(NONCE_SIZE))
    size = 1 << n
    gates = np.array([_fisher_yates(ks, size) for _ in range(m)], dtype=np.uint8)
    return QppPad.from_gates(n, gates)


def export_pad(pad: QppPad) -> bytes:
    """Serialise a pad for debugging. Never contains the session key."""
    header = _PAD_HEADER.pack(PAD_MAGIC, PAD_FORMAT_VERSION, pad.n, pad.m)
    if pad.n == 8:
        return header + pad.gates.tobytes()
    packed = (pad.gates[:, 0::2] << 4) | pad.gates[:, 1::2]
    return header + packed.astype(np.uint8).tobytes()


def load_pad(data: bytes) -> QppPad:
    """Parse the ``QPPD`` format produced by :func:`export_pad`."""
    if len(data) < _PAD_HEADER.size:
        raise DecodeError("pad file is shorter than its header")
    magic, version, n, m = _PAD_HEADER.unpack_from(data)
    if magic != PAD_MAGIC:
        raise DecodeError("not a pad file (bad magic)")
    if version != PAD_FORMAT_VERSION:
        raise DecodeError(f"unsupported pad format version {version}")
    try:
        validate_pad_params(n, m)
    except ParameterError as exc:
        raise DecodeError(str(exc)) from exc
    size = 1 << n
    body = data[_PAD_HEADER.size:]
    expected = m * size if n == 8 else m * size // 2
    if len(body) != expected:
        raise DecodeError(f"pad body holds {len(body)} bytes, expected {expected}")
    raw = np.frombuffer(body, dtype=np.uint8).reshape(m, -1)
    if n == 4:
        gates = np.empty((m, size), dtype=np.uint8)
        gates[:, 0::2] = raw >> 4
        gates[:, 1::2] = raw & 0x0F
    else:
        gates = raw.copy()
    try:
        return QppPad.from_gates(n, gates)
    except ValidationError as exc:
        raise DecodeError(f"pad contains an invalid gate: {exc}") from exc
