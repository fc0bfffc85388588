"""Handshake message codecs.

Handshake messages travel as records of type 0x01 whose payload starts with
a 2-byte inner message type (0x0001 ClientHello, 0x0002 ServerHello).

ClientHello::

    version u8 | client_random[32] | kem_count u8 | kem_ids u16* |
    kem_public_key <u16> | extensions <u16: n u8, M u16, flags u8>

ServerHello::

    version u8 | server_random[32] | chosen_kem u16 | kem_ciphertext <u16> |
    extensions <u16: n u8, M u16, flags u8> | signature <u16> | server_confirm[32]

The signature vector is a hook for signature plug-ins and is empty today.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from enum import IntEnum, IntFlag

from src.qppnest.channel.codec import ByteReader, vector16
from src.qppnest.errors import BadVersionError, MalformedMessageError, UnknownTypeError

PROTOCOL_VERSION = 0x01
RANDOM_SIZE = 32
CONFIRM_SIZE = 32

_PARAMS = struct.Struct(">BHB")


class MessageType(IntEnum):
    CLIENT_HELLO = 0x0001
    SERVER_HELLO = 0x0002


class HelloFlags(IntFlag):
    NONE = 0
    RECORD_MAC = 0x01


@dataclass(frozen=True)
class PadParams:
    n: int = 8
    m: int = 64
    flags: HelloFlags = HelloFlags.NONE

    def encode(self) -> bytes:
        return vector16(_PARAMS.pack(self.n, self.m, int(self.flags)))

    @classmethod
    def decode(cls, reader: ByteReader) -> "PadParams":
        ext = ByteReader(reader.vector16(), "extensions")
        n, m, flags = ext.u8(), ext.u16(), ext.u8()
        ext.finish()
        return cls(n=n, m=m, flags=HelloFlags(flags & HelloFlags.RECORD_MAC))

    @property
    def record_mac(self) -> bool:
        return bool(self.flags & HelloFlags.RECORD_MAC)


def _check_version(version: int) -> None:
    if version != PROTOCOL_VERSION:
        raise BadVersionError(f"unsupported handshake version {version}")


def _open_message(data: bytes, expected: MessageType) -> ByteReader:
    reader = ByteReader(data, expected.name)
    msg_type = reader.u16()
    if msg_type != expected:
        raise UnknownTypeError(f"expected {expected.name}, got message type 0x{msg_type:04x}")
    return reader


@dataclass(frozen=True)
class ClientHello:
    client_random: bytes
    kem_ids: tuple[int, ...]
    kem_public_key: bytes
    params: PadParams = PadParams()
    version: int = PROTOCOL_VERSION

    def encode(self) -> bytes:
        if not self.kem_ids or len(self.kem_ids) > 0xFF:
            raise MalformedMessageError("ClientHello must offer between 1 and 255 KEMs")
        return (
            int(MessageType.CLIENT_HELLO).to_bytes(2, "big")
            + bytes([self.version])
            + self.client_random
            + bytes([len(self.kem_ids)])
            + b"".join(k.to_bytes(2, "big") for k in self.kem_ids)
            + vector16(self.kem_public_key)
            + self.params.encode()
        )

    @classmethod
    def decode(cls, data: bytes) -> "ClientHello":
        reader = _open_message(data, MessageType.CLIENT_HELLO)
        version = reader.u8()
        _check_version(version)
        client_random = reader.take(RANDOM_SIZE)
        count = reader.u8()
        if count == 0:
            raise MalformedMessageError("ClientHello offers no KEM")
        kem_ids = tuple(reader.u16() for _ in range(count))
        public_key = reader.vector16()
        params = PadParams.decode(reader)
        reader.finish()
        return cls(client_random, kem_ids, public_key, params, version)


@dataclass(frozen=True)
class ServerHello:
    server_random: bytes
    chosen_kem_id: int
    kem_ciphertext: bytes
    params: PadParams = PadParams()
    signature: bytes = b""
    server_confirm: bytes = bytes(CONFIRM_SIZE)
    version: int = PROTOCOL_VERSION

    def encode(self) -> bytes:
        if len(self.server_confirm) != CONFIRM_SIZE:
            raise MalformedMessageError("server_confirm must be 32 bytes")
        return (
            int(MessageType.SERVER_HELLO).to_bytes(2, "big")
            + bytes([self.version])
            + self.server_random
            + self.chosen_kem_id.to_bytes(2, "big")
            + vector16(self.kem_ciphertext)
            + self.params.encode()
            + vector16(self.signature)
            + self.server_confirm
        )

    def without_confirm(self) -> "ServerHello":
        return replace(self, server_confirm=bytes(CONFIRM_SIZE))

    @classmethod
    def decode(cls, data: bytes) -> "ServerHello":
        reader = _open_message(data, MessageType.SERVER_HELLO)
        version = reader.u8()
        _check_version(version)
        server_random = reader.take(RANDOM_SIZE)
        chosen = reader.u16()
        ciphertext = reader.vector16()
        params = PadParams.decode(reader)
        signature = reader.vector16()
        confirm = reader.take(CONFIRM_SIZE)
        reader.finish()
        return cls(server_random, chosen, ciphertext, params, signature, confirm, version)


def zero_confirm(server_hello_bytes: bytes) -> bytes:
    """The received ServerHello bytes with the trailing confirm tag zeroed."""
    return server_hello_bytes[:-CONFIRM_SIZE] + bytes(CONFIRM_SIZE)
