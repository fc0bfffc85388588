"""Typed errors raised across the toolkit.

Every failure caused by bad input or a misbehaving peer is a subclass of
``QppError`` so callers (and the CLI) can tell protocol problems apart from
programming errors.
"""

from __future__ import annotations

from enum import IntEnum


class AlertDescription(IntEnum):
    """Alert codes carried in alert records (values follow TLS where one exists)."""

    CLOSE_NOTIFY = 0
    UNEXPECTED_MESSAGE = 10
    BAD_RECORD_MAC = 20
    HANDSHAKE_FAILURE = 40
    ILLEGAL_PARAMETER = 47
    DECODE_ERROR = 50
    DECRYPT_ERROR = 51
    PROTOCOL_VERSION = 70
    INTERNAL_ERROR = 80


class QppError(Exception):
    """Root of every error raised by qppnest."""


class ParameterError(QppError, ValueError):
    """Invalid algorithm parameters, e.g. an unsupported (n, M) pair."""


class ConfigurationError(QppError, ValueError):
    """Invalid configuration such as an empty KEM list."""


class ValidationError(QppError, ValueError):
    """A value failed a structural check (e.g. a non-bijective gate)."""


class InsufficientDataError(QppError, ValueError):
    """Not enough input bytes to compute a statistic."""


class UndefinedStatisticError(QppError, ValueError):
    """The statistic is mathematically undefined for this input."""


class DecodeError(QppError, ValueError):
    """Wire bytes could not be decoded."""

    alert = AlertDescription.DECODE_ERROR


class BadMagicError(DecodeError):
    pass


class BadVersionError(DecodeError):
    alert = AlertDescription.PROTOCOL_VERSION


class TruncatedError(DecodeError):
    pass


class OversizeError(DecodeError):
    pass


class TrailingDataError(DecodeError):
    pass


class UnknownTypeError(DecodeError):
    pass


class MalformedMessageError(DecodeError):
    pass


class HandshakeError(QppError):
    """The handshake cannot complete; ``alert`` names the reason."""

    alert = AlertDescription.HANDSHAKE_FAILURE

    def __init__(self, message: str, alert: AlertDescription | None = None) -> None:
        super().__init__(message)
        if alert is not None:
            self.alert = alert


class HandshakeFailure(HandshakeError):
    """No acceptable parameters could be negotiated."""


class AuthenticationError(HandshakeError):
    """Key confirmation or a record MAC did not verify."""

    alert = AlertDescription.DECRYPT_ERROR


class PeerAlertError(HandshakeError):
    """The peer sent a fatal alert."""


class ReplayError(QppError):
    """A record arrived with a sequence number that is not strictly increasing."""


class InsecureKemError(QppError, RuntimeError):
    """The mock KEM was used without acknowledging that it is insecure."""


class QppIOError(QppError, OSError):
    """File or network I/O failed."""
