"""Socket helpers with automatic retry on transient connect errors.

Retries cover: connection refused/reset, timeouts and unreachable hosts,
with exponential backoff.
"""

from __future__ import annotations

import errno
import socket
import time

from src.qppnest.errors import ParameterError, QppIOError
from src.qppnest.progress import log_warning

INITIAL_BACKOFF = 0.25

_RETRYABLE_ERRNOS = {
    errno.ECONNREFUSED: "connection refused",
    errno.ECONNRESET: "connection reset",
    errno.ETIMEDOUT: "timeout",
    errno.EHOSTUNREACH: "host unreachable",
    errno.ENETUNREACH: "network unreachable",
}


def parse_address(text: str) -> tuple[str, int]:
    """``host:port`` (IPv6 as ``[::1]:port``)."""
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ParameterError(f"address must be host:port, got {text!r}")
    host = host.strip("[]") or "127.0.0.1"
    port_number = int(port)
    if not 0 <= port_number <= 65535:
        raise ParameterError(f"port out of range in {text!r}")
    return host, port_number


def _is_retryable(exc: OSError) -> str | None:
    """Return a short label if the error is transient and worth retrying."""
    if isinstance(exc, (socket.timeout, TimeoutError)):
        return "timeout"
    return _RETRYABLE_ERRNOS.get(exc.errno)


def connect_with_retry(
    address: tuple[str, int],
    *,
    attempts: int = 5,
    timeout: float = 30.0,
) -> socket.socket:
    backoff = INITIAL_BACKOFF
    for attempt in range(attempts):
        try:
            sock = socket.create_connection(address, timeout=timeout)
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            return sock
        except OSError as exc:
            label = _is_retryable(exc)
            if label and attempt < attempts - 1:
                wait = backoff * (2 ** attempt)
                log_warning(
                    f"{label} (attempt {attempt + 1}/{attempts}), retrying in {wait:.2f}s..."
                )
                time.sleep(wait)
            else:
                raise QppIOError(f"cannot connect to {address[0]}:{address[1]}: {exc}") from exc
    raise QppIOError(f"cannot connect to {address[0]}:{address[1]}")
