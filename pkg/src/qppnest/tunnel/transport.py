"""Record transport over a stream socket, through the outer layer."""

from __future__ import annotations

import socket
import threading
from typing import Protocol

from src.qppnest.channel.records import Record, RecordReader, encode_record
from src.qppnest.errors import QppIOError, TruncatedError
from src.qppnest.tunnel.outer import OuterLayer

RECV_SIZE = 64 * 1024


class StreamSocket(Protocol):
    def sendall(self, data: bytes) -> None: ...

    def recv(self, size: int) -> bytes: ...


class RecordTransport:
    """Send and receive whole records; one sender and one receiver thread at most."""

    def __init__(self, sock: StreamSocket, outer: OuterLayer) -> None:
        self._sock = sock
        self._outer = outer
        self._reader = RecordReader()
        self._pending: list[Record] = []
        self._send_lock = threading.Lock()
        self.bytes_sent = 0
        self.bytes_received = 0

    def _recv_exact(self, count: int) -> bytes:
        buf = b""
        while len(buf) < count:
            chunk = self._raw_recv(count - len(buf))
            if not chunk:
                raise TruncatedError("connection closed during outer preamble")
            buf += chunk
        return buf

    def _raw_recv(self, size: int) -> bytes:
        try:
            data = self._sock.recv(size)
        except socket.timeout as exc:
            raise QppIOError("read timed out") from exc
        except OSError as exc:
            raise QppIOError(f"receive failed: {exc}") from exc
        self.bytes_received += len(data)
        return data

    def _raw_send(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise QppIOError(f"send failed: {exc}") from exc
        self.bytes_sent += len(data)

    def start(self) -> None:
        """Exchange outer preambles (both sides send first, then read)."""
        preamble = self._outer.make_preamble()
        if preamble:
            self._raw_send(preamble)
            self._outer.accept_preamble(self._recv_exact(self._outer.preamble_size))

    def send_wire(self, wire: bytes) -> None:
        with self._send_lock:
            self._raw_send(self._outer.wrap(wire))

    def send_record(self, record: Record) -> None:
        self.send_wire(encode_record(record))

    def recv_record(self) -> Record | None:
        """Next record, or None on a clean end of stream."""
        while not self._pending:
            data = self._raw_recv(RECV_SIZE)
            if not data:
                self._reader.close()
                return None
            self._pending.extend(self._reader.feed(self._outer.unwrap(data)))
        return self._pending.pop(0)
