"""Nested-channel tunnel: handshake over a transport, then relay sealed records.

Sequence numbers on the wire:

    seq 0  ClientHello / ServerHello (plaintext handshake records)
    seq 1  client confirm record
    seq 1+ server data, seq 2+ client data (sealed)

Alerts sent before the session key exists travel unencrypted with seq 0.
"""

from __future__ import annotations

import os
import socket
import sys
import threading
from dataclasses import dataclass
from typing import Callable

from src.qppnest.channel.handshake import (
    SEED_SIZE,
    ChannelConfig,
    client_confirm,
    client_finish,
    client_init,
    server_finish,
    server_respond,
)
from src.qppnest.channel.kem import MockKem
from src.qppnest.channel.records import (
    AlertLevel,
    Direction,
    Record,
    RecordType,
    SecureChannel,
    alert_payload,
    parse_alert,
)
from src.qppnest.config import Settings
from src.qppnest.errors import (
    AlertDescription,
    DecodeError,
    HandshakeError,
    PeerAlertError,
    QppError,
    QppIOError,
    TruncatedError,
    UnknownTypeError,
)
from src.qppnest.net import connect_with_retry
from src.qppnest.progress import log_error, log_handshake, log_tunnel, log_warning
from src.qppnest.tunnel.outer import OuterLayer, OuterMode
from src.qppnest.tunnel.transport import RecordTransport

RELAY_CHUNK = 64 * 1024

Reader = Callable[[int], bytes]
Writer = Callable[[bytes], None]


@dataclass(frozen=True)
class TunnelOptions:
    settings: Settings
    outer: OuterMode = OuterMode.NONE
    outer_key: bytes | None = None

    def channel_config(self) -> ChannelConfig:
        kem = MockKem(acknowledge_insecure=self.settings.insecure_demo)
        return ChannelConfig(
            kems=(kem,),
            n=self.settings.n,
            m=self.settings.m,
            record_mac=self.settings.record_mac,
        )

    def open_transport(self, sock: socket.socket) -> RecordTransport:
        sock.settimeout(self.settings.read_timeout)
        transport = RecordTransport(sock, OuterLayer(self.outer, self.outer_key))
        transport.start()
        return transport


def _send_plain_alert(transport: RecordTransport, description: AlertDescription) -> None:
    try:
        transport.send_record(Record(RecordType.ALERT, 0, alert_payload(description)))
    except QppIOError:
        pass


def _expect(transport: RecordTransport, wanted: RecordType, stage: str) -> Record:
    record = transport.recv_record()
    if record is None:
        raise HandshakeError(f"peer closed the connection while waiting for {stage}")
    if record.type is RecordType.ALERT:
        _, description = parse_alert(record.payload)
        raise PeerAlertError(f"peer aborted the handshake: {description.name.lower()}", description)
    if record.type is not wanted:
        raise HandshakeError(
            f"expected {stage}, got a {record.type.name.lower()} record",
            AlertDescription.UNEXPECTED_MESSAGE,
        )
    return record


def client_handshake(transport: RecordTransport, config: ChannelConfig) -> SecureChannel:
    state, hello = client_init(config, os.urandom(SEED_SIZE))
    transport.send_record(Record(RecordType.HANDSHAKE, 0, hello.encode()))
    log_handshake("client", "ClientHello sent")
    try:
        reply = _expect(transport, RecordType.HANDSHAKE, "ServerHello")
        key = client_finish(state, reply.payload)
    except PeerAlertError:
        raise
    except (HandshakeError, DecodeError) as exc:
        _send_plain_alert(transport, exc.alert)
        raise
    transport.send_record(Record(RecordType.CONFIRM, 1, client_confirm(state)))
    log_handshake("client", "server confirmed, confirm sent")
    params = state.params
    return SecureChannel(
        key,
        Direction.C2S,
        params.n,
        params.m,
        record_mac=params.record_mac,
        first_seq=2,
        last_received=0,
    )


def server_handshake(transport: RecordTransport, config: ChannelConfig) -> SecureChannel:
    try:
        hello = _expect(transport, RecordType.HANDSHAKE, "ClientHello")
        state, reply = server_respond(config, hello.payload, os.urandom(SEED_SIZE), os.urandom(SEED_SIZE))
        transport.send_record(Record(RecordType.HANDSHAKE, 0, reply.encode()))
        log_handshake("server", "ServerHello sent")
        confirm = _expect(transport, RecordType.CONFIRM, "client confirm")
        key = server_finish(state, confirm.payload)
    except PeerAlertError:
        raise
    except (HandshakeError, DecodeError) as exc:
        _send_plain_alert(transport, exc.alert)
        raise
    log_handshake("server", "client confirmed")
    params = state.params
    return SecureChannel(
        key,
        Direction.S2C,
        params.n,
        params.m,
        record_mac=params.record_mac,
        first_seq=1,
        last_received=1,
    )


class TunnelSession:
    """Sealed data flow over one connection; sends are serialised by a lock.

    close_notify half-closes the sending direction: once it (or a fatal
    alert) is out, further data is dropped and ``send_data`` returns False.
    """

    def __init__(self, transport: RecordTransport, channel: SecureChannel) -> None:
        self.transport = transport
        self.channel = channel
        self._send_lock = threading.Lock()
        self._closed = False

    @property
    def closed(self) -> bool:
        return self._closed

    def _send(self, record_type: RecordType, payload: bytes, *, final: bool = False) -> bool:
        with self._send_lock:
            if self._closed:
                return False
            if final:
                self._closed = True
            self.transport.send_wire(self.channel.seal_next(record_type, payload))
            return True

    def send_data(self, data: bytes) -> bool:
        step = min(RELAY_CHUNK, self.channel.max_plaintext)
        for offset in range(0, len(data), step):
            if not self._send(RecordType.DATA, data[offset:offset + step]):
                return False
        return True

    def close(self) -> None:
        """Send close_notify once; later calls are no-ops."""
        self._send(
            RecordType.ALERT,
            alert_payload(AlertDescription.CLOSE_NOTIFY, AlertLevel.WARNING),
            final=True,
        )

    def fail(self, description: AlertDescription) -> None:
        try:
            self._send(RecordType.ALERT, alert_payload(description), final=True)
        except QppError:
            pass

    def receive(self) -> bytes | None:
        """Next data payload, or None after the peer's close_notify."""
        while True:
            record = self.transport.recv_record()
            if record is None:
                raise TruncatedError("connection closed without close_notify")
            record = self.channel.open(record)
            if record.type is RecordType.DATA:
                if record.payload:
                    return record.payload
                continue
            if record.type is RecordType.ALERT:
                level, description = parse_alert(record.payload)
                if description is AlertDescription.CLOSE_NOTIFY:
                    return None
                if level is AlertLevel.FATAL:
                    raise PeerAlertError(f"peer sent fatal alert: {description.name.lower()}", description)
                log_warning(f"peer warning alert: {description.name.lower()}")
                continue
            raise UnknownTypeError(f"unexpected {record.type.name.lower()} record after the handshake")


@dataclass
class _Outbound:
    sent: int = 0
    error: QppError | None = None


def _io_error(action: str, exc: OSError) -> QppIOError:
    return QppIOError(f"relay {action} failed: {exc}")


def _alert_for(exc: QppError) -> AlertDescription:
    if isinstance(exc, (HandshakeError, DecodeError)):
        return exc.alert
    if isinstance(exc, QppIOError):
        return AlertDescription.INTERNAL_ERROR
    return AlertDescription.DECODE_ERROR


def _pump(session: TunnelSession, read: Reader, outbound: _Outbound) -> None:
    try:
        while True:
            try:
                chunk = read(RELAY_CHUNK)
            except OSError as exc:
                raise _io_error("read", exc) from exc
            if not chunk:
                break
            if not session.send_data(chunk):
                return
            outbound.sent += len(chunk)
        session.close()
    except QppError as exc:
        outbound.error = exc
        session.fail(_alert_for(exc))


def relay(
    session: TunnelSession,
    read: Reader,
    write: Writer,
    *,
    on_peer_closed: Callable[[], None] | None = None,
    answer_peer_close: bool = False,
    join_timeout: float | None = None,
) -> tuple[int, int]:
    """Pump ``read`` into the tunnel while writing tunnel data to ``write``.

    Returns (bytes sent, bytes received) of plaintext. The inbound side runs
    on the calling thread; the outbound side on a daemon thread.

    The peer's close_notify only ends the inbound direction. By default the
    outbound side then runs to the end of ``read`` (bounded by
    ``join_timeout``) and sends its own close_notify. With
    ``answer_peer_close`` the session replies with close_notify at once and
    drops whatever ``read`` still produces, for sources that may never end.
    """
    outbound = _Outbound()
    pump = threading.Thread(target=_pump, args=(session, read, outbound), daemon=True)
    pump.start()
    received = 0
    try:
        while (data := session.receive()) is not None:
            try:
                write(data)
            except OSError as exc:
                raise _io_error("write", exc) from exc
            received += len(data)
    except QppError as exc:
        session.fail(_alert_for(exc))
        if outbound.error is not None:
            raise outbound.error from exc
        raise
    if on_peer_closed is not None:
        on_peer_closed()
    if answer_peer_close:
        session.close()
    else:
        pump.join(join_timeout)
        if pump.is_alive():
            log_warning("outbound side still open after the peer closed; sending close_notify")
            session.close()
    if outbound.error is not None:
        raise outbound.error
    return outbound.sent, received


def serve_echo(session: TunnelSession) -> int:
    """Echo every data record back until close_notify; returns bytes echoed."""
    echoed = 0
    try:
        while (data := session.receive()) is not None:
            session.send_data(data)
            echoed += len(data)
    except QppError as exc:
        session.fail(_alert_for(exc))
        raise
    session.close()
    return echoed


def _shutdown_write(sock: socket.socket) -> Callable[[], None]:
    def shut() -> None:
        try:
            sock.shutdown(socket.SHUT_WR)
        except OSError:
            pass

    return shut


def _stdio_writer(data: bytes) -> None:
    sys.stdout.buffer.write(data)
    sys.stdout.buffer.flush()


def _stdin_reader(size: int) -> bytes:
    return sys.stdin.buffer.read1(size)


@dataclass(frozen=True)
class ServeTarget:
    """What a server connection relays to: echo, a forward address, or stdio."""

    echo: bool = False
    forward: tuple[str, int] | None = None


def handle_server_connection(sock: socket.socket, peer: str, options: TunnelOptions, target: ServeTarget) -> None:
    with sock:
        try:
            transport = options.open_transport(sock)
            channel = server_handshake(transport, options.channel_config())
            session = TunnelSession(transport, channel)
            log_tunnel(f"{peer} established (n={channel.pad.n}, M={channel.pad.m})")
            if target.echo:
                echoed = serve_echo(session)
                log_tunnel(f"{peer} closed after echoing {echoed:,} bytes")
            elif target.forward is not None:
                upstream = connect_with_retry(
                    target.forward,
                    attempts=options.settings.connect_retries,
                    timeout=options.settings.read_timeout,
                )
                with upstream:
                    upstream.settimeout(None)
                    sent, received = relay(
                        session,
                        upstream.recv,
                        upstream.sendall,
                        on_peer_closed=_shutdown_write(upstream),
                        join_timeout=options.settings.read_timeout,
                    )
                log_tunnel(f"{peer} closed ({received:,} bytes in, {sent:,} bytes out)")
            else:
                sent, received = relay(session, _stdin_reader, _stdio_writer, answer_peer_close=True)
                log_tunnel(f"{peer} closed ({received:,} bytes in, {sent:,} bytes out)")
        except QppError as exc:
            log_error(f"{peer}: {exc}")


class TunnelServer:
    """Accepts connections and runs each on its own thread with isolated state."""

    def __init__(self, listen: tuple[str, int], options: TunnelOptions, target: ServeTarget, *, max_connections: int | None = None) -> None:
        self.options = options
        self.target = target
        self._max_connections = max_connections
        self._sock = socket.socket(socket.AF_INET6 if ":" in listen[0] else socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            self._sock.bind(listen)
        except OSError as exc:
            self._sock.close()
            raise QppIOError(f"cannot listen on {listen[0]}:{listen[1]}: {exc}") from exc
        self._sock.listen(16)
        self._stopping = threading.Event()
        self._workers: list[threading.Thread] = []
        self._accept_thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._sock.getsockname()[:2]
        return host, port

    def serve_forever(self) -> None:
        accepted = 0
        log_tunnel(f"listening on {self.address[0]}:{self.address[1]} (outer={self.options.outer.value})")
        while not self._stopping.is_set():
            try:
                conn, addr = self._sock.accept()
            except OSError:
                if self._stopping.is_set():
                    break
                raise
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            peer = f"{addr[0]}:{addr[1]}"
            log_tunnel(f"{peer} connected")
            worker = threading.Thread(
                target=handle_server_connection,
                args=(conn, peer, self.options, self.target),
                daemon=True,
            )
            worker.start()
            self._workers.append(worker)
            accepted += 1
            if self._max_connections is not None and accepted >= self._max_connections:
                break
        for worker in self._workers:
            worker.join()

    def start(self) -> "TunnelServer":
        self._accept_thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._accept_thread.start()
        return self

    def shutdown(self) -> None:
        self._stopping.set()
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)

    def __enter__(self) -> "TunnelServer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()


def open_client(target: tuple[str, int], options: TunnelOptions) -> tuple[socket.socket, TunnelSession]:
    """Connect, run the client handshake and return the live session."""
    sock = connect_with_retry(
        target,
        attempts=options.settings.connect_retries,
        timeout=options.settings.read_timeout,
    )
    try:
        transport = options.open_transport(sock)
        channel = client_handshake(transport, options.channel_config())
    except BaseException:
        sock.close()
        raise
    return sock, TunnelSession(transport, channel)


def run_client(
    target: tuple[str, int],
    options: TunnelOptions,
    *,
    local: tuple[str, int] | None = None,
) -> tuple[int, int]:
    """Client side of ``connect``: relay stdio, or one accepted local TCP client."""
    if local is None:
        sock, session = open_client(target, options)
        with sock:
            log_tunnel(f"connected to {target[0]}:{target[1]}")
            return relay(session, _stdin_reader, _stdio_writer)

    listener = socket.create_server(local)
    with listener:
        log_tunnel(f"waiting for a local client on {local[0]}:{listener.getsockname()[1]}")
        conn, _ = listener.accept()
    with conn:
        sock, session = open_client(target, options)
        with sock:
            log_tunnel(f"connected to {target[0]}:{target[1]}")
            return relay(
                session,
                conn.recv,
                conn.sendall,
                on_peer_closed=_shutdown_write(conn),
                join_timeout=options.settings.read_timeout,
            )
