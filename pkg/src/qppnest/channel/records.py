"""Record framing and the QPP-protected record layer.

Wire format (all integers big-endian)::

    "QP" | version 0x01 | type | seq (u64) | length (u32) | payload

Sealed records carry QPP ciphertext; the header is authenticated only by
context unless the optional HMAC-SHA-256 trailer is negotiated. Without
the trailer a tampered payload decrypts to garbage rather than failing.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass
from enum import Enum, IntEnum

from src.qppnest.channel.codec import ByteReader
from src.qppnest.crypto.cipher import MAX_SEQ, CipherSession, decrypt_record, encrypt_record
from src.qppnest.crypto.keystream import derive_subkey
from src.qppnest.crypto.pad import QppPad, generate_pad
from src.qppnest.errors import (
    AlertDescription,
    AuthenticationError,
    BadMagicError,
    BadVersionError,
    OversizeError,
    ParameterError,
    ReplayError,
    TruncatedError,
    UnknownTypeError,
)

MAGIC = b"QP"
RECORD_VERSION = 0x01
MAX_PAYLOAD = 1 << 20
MAC_SIZE = 32

_HEADER = struct.Struct(">2sBBQI")
HEADER_SIZE = _HEADER.size


class RecordType(IntEnum):
    HANDSHAKE = 0x01
    DATA = 0x02
    ALERT = 0x03
    CONFIRM = 0x04


class AlertLevel(IntEnum):
    WARNING = 1
    FATAL = 2


class Direction(Enum):
    C2S = "c2s"
    S2C = "s2c"

    @property
    def enc_label(self) -> bytes:
        return b"QPP/enc/v1/" + self.value.encode()

    @property
    def mac_label(self) -> bytes:
        return b"QPP/mac/v1/" + self.value.encode()


@dataclass(frozen=True)
class Record:
    type: RecordType
    seq: int
    payload: bytes = b""


def encode_record(record: Record) -> bytes:
    if len(record.payload) > MAX_PAYLOAD:
        raise OversizeError(f"payload of {len(record.payload)} bytes exceeds {MAX_PAYLOAD}")
    if not 0 <= record.seq <= MAX_SEQ:
        raise ParameterError(f"sequence number {record.seq} does not fit in 64 bits")
    return _HEADER.pack(MAGIC, RECORD_VERSION, int(record.type), record.seq, len(record.payload)) + record.payload


def _parse_header(header: bytes) -> tuple[RecordType, int, int]:
    magic, version, rtype, seq, length = _HEADER.unpack(header)
    if magic != MAGIC:
        raise BadMagicError(f"bad record magic {magic.hex()}")
    if version != RECORD_VERSION:
        raise BadVersionError(f"unsupported record version {version}")
    try:
        record_type = RecordType(rtype)
    except ValueError:
        raise UnknownTypeError(f"unknown record type 0x{rtype:02x}") from None
    if length > MAX_PAYLOAD:
        raise OversizeError(f"declared payload length {length} exceeds {MAX_PAYLOAD}")
    return record_type, seq, length


def decode_record(data: bytes) -> Record:
    """Decode exactly one record; trailing bytes are an error."""
    reader = ByteReader(data, "record")
    record_type, seq, length = _parse_header(reader.take(HEADER_SIZE))
    payload = reader.take(length)
    reader.finish()
    return Record(record_type, seq, payload)


class RecordReader:
    """Incremental deframer for a byte stream; a bad header fails immediately."""

    def __init__(self) -> None:
        self._buffer = bytearray()

    @property
    def pending(self) -> int:
        return len(self._buffer)

    def feed(self, data: bytes) -> list[Record]:
        self._buffer += data
        records = []
        while len(self._buffer) >= HEADER_SIZE:
            record_type, seq, length = _parse_header(bytes(self._buffer[:HEADER_SIZE]))
            end = HEADER_SIZE + length
            if len(self._buffer) < end:
                break
            records.append(Record(record_type, seq, bytes(self._buffer[HEADER_SIZE:end])))
            del self._buffer[:end]
        return records

    def close(self) -> None:
        if self._buffer:
            raise TruncatedError(f"stream ended inside a record ({len(self._buffer)} bytes buffered)")


def alert_payload(description: AlertDescription, level: AlertLevel = AlertLevel.FATAL) -> bytes:
    return bytes([int(level), int(description)])


def parse_alert(payload: bytes) -> tuple[AlertLevel, AlertDescription]:
    reader = ByteReader(payload, "alert")
    level, description = reader.u8(), reader.u8()
    reader.finish()
    try:
        return AlertLevel(level), AlertDescription(description)
    except ValueError:
        raise UnknownTypeError(f"unknown alert {level}/{description}") from None


class SecureChannel:
    """Per-connection record protection after the handshake.

    Outbound and inbound directions use distinct encryption subkeys
    (``QPP/enc/v1/c2s`` and ``QPP/enc/v1/s2c``) over one shared pad. Sequence
    numbers strictly increase per direction; anything else is a replay.
    """

    def __init__(
        self,
        session_key: bytes,
        outbound: Direction,
        n: int = 8,
        m: int = 64,
        *,
        record_mac: bool = False,
        pad: QppPad | None = None,
        first_seq: int = 1,
        last_received: int | None = None,
    ) -> None:
        inbound = Direction.S2C if outbound is Direction.C2S else Direction.C2S
        pad = pad if pad is not None else generate_pad(session_key, n, m)
        self.pad = pad
        self.outbound = outbound
        self.inbound = inbound
        self.record_mac = record_mac
        self._send = CipherSession.from_session_key(session_key, label=outbound.enc_label, pad=pad)
        self._recv = CipherSession.from_session_key(session_key, label=inbound.enc_label, pad=pad)
        self._send_mac = derive_subkey(session_key, outbound.mac_label) if record_mac else b""
        self._recv_mac = derive_subkey(session_key, inbound.mac_label) if record_mac else b""
        self._next_seq = first_seq
        self._last_sent: int | None = None
        self._last_received = last_received

    @staticmethod
    def _tag(key: bytes, record_type: RecordType, seq: int, ciphertext: bytes) -> bytes:
        header = _HEADER.pack(MAGIC, RECORD_VERSION, int(record_type), seq, len(ciphertext) + MAC_SIZE)
        return hmac.new(key, header + ciphertext, hashlib.sha256).digest()

    def seal(self, record: Record) -> bytes:
        if self._last_sent is not None and record.seq <= self._last_sent:
            raise ReplayError(f"outbound seq {record.seq} does not increase past {self._last_sent}")
        body = encrypt_record(self._send, record.seq, record.payload)
        if self.record_mac:
            body += self._tag(self._send_mac, record.type, record.seq, body)
        wire = encode_record(Record(record.type, record.seq, body))
        self._last_sent = record.seq
        self._next_seq = record.seq + 1
        return wire

    def seal_next(self, record_type: RecordType, payload: bytes) -> bytes:
        return self.seal(Record(record_type, self._next_seq, payload))

    def seal_alert(self, description: AlertDescription, level: AlertLevel = AlertLevel.FATAL) -> bytes:
        return self.seal_next(RecordType.ALERT, alert_payload(description, level))

    def open(self, wire: bytes | Record) -> Record:
        record = wire if isinstance(wire, Record) else decode_record(wire)
        if self._last_received is not None and record.seq <= self._last_received:
            raise ReplayError(f"inbound seq {record.seq} does not increase past {self._last_received}")
        body = record.payload
        if self.record_mac:
            if len(body) < MAC_SIZE:
                raise AuthenticationError("record too short for its MAC", AlertDescription.BAD_RECORD_MAC)
            body, tag = body[:-MAC_SIZE], body[-MAC_SIZE:]
            expected = self._tag(self._recv_mac, record.type, record.seq, body)
            if not hmac.compare_digest(tag, expected):
                raise AuthenticationError("record MAC mismatch", AlertDescription.BAD_RECORD_MAC)
        plaintext = decrypt_record(self._recv, record.seq, body)
        self._last_received = record.seq
        return Record(record.type, record.seq, plaintext)

    @property
    def max_plaintext(self) -> int:
        return MAX_PAYLOAD - (MAC_SIZE if self.record_mac else 0)

