"""KEM handshake with HMAC key confirmation.

    client_init     -> ClientHello (fresh KEM public key for the first offered KEM)
    server_respond  -> ServerHello (encapsulation + server_confirm)
    client_finish   -> verifies server_confirm, yields the session key
    client_confirm  -> client confirm tag, sent as a type 0x04 record
    server_finish   -> verifies it, yields the server's session key

transcript_hash = SHA-256(ClientHello bytes || ServerHello bytes with the
confirm field zeroed). A session key is only readable from a state once
the peer's confirmation has verified.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from src.qppnest.channel.kem import KemAlgorithm, kem_name
from src.qppnest.channel.messages import (
    CONFIRM_SIZE,
    ClientHello,
    HelloFlags,
    PadParams,
    ServerHello,
    zero_confirm,
)
from src.qppnest.crypto.keystream import SESSION_KEY_SIZE, hkdf_sha256
from src.qppnest.crypto.pad import validate_pad_params
from src.qppnest.errors import (
    AlertDescription,
    AuthenticationError,
    ConfigurationError,
    HandshakeError,
    HandshakeFailure,
    ParameterError,
)

SESSION_INFO = b"QPP-NESTED-v1"
SERVER_FINISHED = b"srv-fin"
CLIENT_FINISHED = b"cli-fin"
SEED_SIZE = 32


class Role(Enum):
    CLIENT = "client"
    SERVER = "server"


@dataclass(frozen=True)
class ChannelConfig:
    kems: tuple[KemAlgorithm, ...]
    n: int = 8
    m: int = 64
    record_mac: bool = False

    def __post_init__(self) -> None:
        validate_pad_params(self.n, self.m)

    def find_kem(self, identifier: int) -> KemAlgorithm | None:
        for kem in self.kems:
            if kem.identifier == identifier:
                return kem
        return None

    @property
    def pad_params(self) -> PadParams:
        flags = HelloFlags.RECORD_MAC if self.record_mac else HelloFlags.NONE
        return PadParams(self.n, self.m, flags)


@dataclass
class HandshakeState:
    role: Role
    config: ChannelConfig
    client_hello: bytes = b""
    server_hello: bytes = b""
    transcript_hash: bytes = b""
    params: PadParams | None = None
    _kem: KemAlgorithm | None = field(default=None, repr=False)
    _secret_key: bytes = field(default=b"", repr=False)
    _pending_key: bytes = field(default=b"", repr=False)
    _confirmed: bool = False

    @property
    def complete(self) -> bool:
        return self._confirmed

    @property
    def session_key(self) -> bytes:
        if not self._confirmed:
            raise HandshakeError("session key is not available before confirmation")
        return self._pending_key

    def _confirm_tag(self, label: bytes) -> bytes:
        return hmac.new(self._pending_key, label + self.transcript_hash, hashlib.sha256).digest()


def _check_seed(seed: bytes, what: str) -> None:
    if len(seed) != SEED_SIZE:
        raise ParameterError(f"{what} must be {SEED_SIZE} bytes, got {len(seed)}")


def transcript_hash(client_hello: bytes, server_hello_zeroed: bytes) -> bytes:
    return hashlib.sha256(client_hello + server_hello_zeroed).digest()


def derive_session_key(shared_secret: bytes, transcript: bytes) -> bytes:
    if not shared_secret:
        raise ParameterError("shared secret must not be empty")
    return hkdf_sha256(shared_secret, b"", SESSION_INFO + transcript, SESSION_KEY_SIZE)


def client_init(config: ChannelConfig, key_seed: bytes) -> tuple[HandshakeState, ClientHello]:
    """Build the ClientHello; deterministic in ``key_seed``."""
    if not config.kems:
        raise ConfigurationError("client must offer at least one KEM")
    _check_seed(key_seed, "key seed")
    kem = config.kems[0]
    public_key, secret_key = kem.keygen(key_seed)
    hello = ClientHello(
        client_random=hkdf_sha256(key_seed, b"", b"QPP/client-random/v1", 32),
        kem_ids=tuple(k.identifier for k in config.kems),
        kem_public_key=public_key,
        params=config.pad_params,
    )
    state = HandshakeState(
        role=Role.CLIENT,
        config=config,
        client_hello=hello.encode(),
        params=config.pad_params,
        _kem=kem,
        _secret_key=secret_key,
    )
    return state, hello


def server_respond(
    config: ChannelConfig,
    hello: ClientHello | bytes,
    server_random: bytes,
    encap_seed: bytes,
) -> tuple[HandshakeState, ServerHello]:
    """Encapsulate to the client's key share and confirm the derived key.

    Only the first offered KEM carries a key share, so it must be one the
    server supports; there is no retry round.
    """
    _check_seed(server_random, "server random")
    _check_seed(encap_seed, "encapsulation seed")
    if isinstance(hello, bytes):
        client_hello_bytes = hello
        hello = ClientHello.decode(hello)
    else:
        client_hello_bytes = hello.encode()

    kem = config.find_kem(hello.kem_ids[0])
    if kem is None:
        offered = ", ".join(kem_name(k) for k in hello.kem_ids)
        raise HandshakeFailure(f"no common KEM (client offered {offered})")
    if len(hello.kem_public_key) != kem.public_key_size:
        raise HandshakeFailure(
            "KEM public key has the wrong length", AlertDescription.ILLEGAL_PARAMETER
        )
    try:
        validate_pad_params(hello.params.n, hello.params.m)
    except ParameterError as exc:
        raise HandshakeFailure(str(exc), AlertDescription.ILLEGAL_PARAMETER) from exc

    ciphertext, shared_secret = kem.encapsulate(hello.kem_public_key, encap_seed)
    reply = ServerHello(
        server_random=bytes(server_random),
        chosen_kem_id=kem.identifier,
        kem_ciphertext=ciphertext,
        params=hello.params,
    )
    digest = transcript_hash(client_hello_bytes, reply.without_confirm().encode())
    state = HandshakeState(
        role=Role.SERVER,
        config=config,
        client_hello=client_hello_bytes,
        transcript_hash=digest,
        params=hello.params,
        _kem=kem,
        _pending_key=derive_session_key(shared_secret, digest),
    )
    reply = replace(reply, server_confirm=state._confirm_tag(SERVER_FINISHED))
    state.server_hello = reply.encode()
    return state, reply


def client_finish(state: HandshakeState, hello2: ServerHello | bytes) -> bytes:
    """Verify the ServerHello and return the session key."""
    if state.role is not Role.CLIENT or not state.client_hello or state._confirmed:
        raise HandshakeError("client_finish needs a fresh client state", AlertDescription.UNEXPECTED_MESSAGE)
    raw = hello2 if isinstance(hello2, bytes) else hello2.encode()
    reply = ServerHello.decode(raw)
    offered = ClientHello.decode(state.client_hello)
    if reply.chosen_kem_id != offered.kem_ids[0]:
        raise AuthenticationError(
            f"server chose {kem_name(reply.chosen_kem_id)}, which carried no key share",
            AlertDescription.ILLEGAL_PARAMETER,
        )
    if reply.params != offered.params:
        raise AuthenticationError(
            "server altered the offered pad parameters", AlertDescription.ILLEGAL_PARAMETER
        )
    shared_secret = state._kem.decapsulate(state._secret_key, reply.kem_ciphertext)
    digest = transcript_hash(state.client_hello, zero_confirm(raw))
    key = derive_session_key(shared_secret, digest)
    expected = hmac.new(key, SERVER_FINISHED + digest, hashlib.sha256).digest()
    if not hmac.compare_digest(expected, reply.server_confirm):
        raise AuthenticationError("server key confirmation failed")
    state.server_hello = raw
    state.transcript_hash = digest
    state.params = reply.params
    state._pending_key = key
    state._secret_key = b""
    state._confirmed = True
    return key


def client_confirm(state: HandshakeState) -> bytes:
    """Client confirm tag: HMAC-SHA-256(session_key, "cli-fin" || transcript_hash)."""
    if state.role is not Role.CLIENT or not state._confirmed:
        raise HandshakeError("client_confirm needs a finished client state")
    return state._confirm_tag(CLIENT_FINISHED)


def server_finish(state: HandshakeState, confirm: bytes) -> bytes:
    if state.role is not Role.SERVER or not state._pending_key:
        raise HandshakeError("server_finish needs a responded server state", AlertDescription.UNEXPECTED_MESSAGE)
    if len(confirm) != CONFIRM_SIZE or not hmac.compare_digest(
        state._confirm_tag(CLIENT_FINISHED), confirm
    ):
        raise AuthenticationError("client key confirmation failed")
    state._confirmed = True
    return state._pending_key


def run_in_memory(
    client_config: ChannelConfig,
    server_config: ChannelConfig,
    seeds: Sequence[bytes],
) -> tuple[bytes, bytes]:
    """Complete one handshake without a transport; returns (client_key, server_key).

    ``seeds`` holds the client key seed, server random and encapsulation seed.
    """
    key_seed, server_random, encap_seed = seeds
    client, hello = client_init(client_config, key_seed)
    server, reply = server_respond(server_config, hello.encode(), server_random, encap_seed)
    client_key = client_finish(client, reply.encode())
    server_key = server_finish(server, client_confirm(client))
    return client_key, server_key
