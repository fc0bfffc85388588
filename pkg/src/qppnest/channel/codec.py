"""Bounded big-endian cursor used by every wire decoder."""

from __future__ import annotations

from src.qppnest.errors import ParameterError, TrailingDataError, TruncatedError


class ByteReader:
    def __init__(self, data: bytes, what: str = "message") -> None:
        self._data = memoryview(bytes(data))
        self._pos = 0
        self._what = what

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def take(self, count: int) -> bytes:
        if count < 0 or count > self.remaining:
            raise TruncatedError(
                f"truncated {self._what}: need {count} bytes at offset {self._pos}, "
                f"{self.remaining} left"
            )
        out = self._data[self._pos:self._pos + count].tobytes()
        self._pos += count
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def u64(self) -> int:
        return int.from_bytes(self.take(8), "big")

    def vector16(self) -> bytes:
        return self.take(self.u16())

    def finish(self) -> None:
        if self.remaining:
            raise TrailingDataError(f"{self.remaining} trailing bytes after {self._what}")


def vector16(data: bytes) -> bytes:
    if len(data) > 0xFFFF:
        raise ParameterError("vector longer than 65535 bytes")
    return len(data).to_bytes(2, "big") + data
