"""Runtime configuration resolved from CLI flags, environment and defaults.

Resolution order for every setting:
1. Explicit value passed by the caller (a CLI flag)
2. Environment variable (``.env`` is loaded at import)
3. Built-in default

Pad defaults follow the two configurations used in practice: n=8 with M=64
gates, or n=4 with M=8 gates.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv

from src.qppnest.errors import ParameterError

load_dotenv()

DEFAULT_N = 8
DEFAULT_M = {8: 64, 4: 8}
DEFAULT_READ_TIMEOUT = 30.0
DEFAULT_CONNECT_RETRIES = 5

_TRUTHY = {"1", "true", "yes", "on"}


def env_flag(name: str) -> bool:
    """Return True when the environment variable is set to a truthy value."""
    return os.environ.get(name, "").strip().lower() in _TRUTHY


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ParameterError(f"{name} must be an integer, got {raw!r}") from exc


def _env_float(name: str) -> float | None:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise ParameterError(f"{name} must be a number, got {raw!r}") from exc


def resolve_pad_params(n: int | None = None, m: int | None = None) -> tuple[int, int]:
    """Pick (n, M): flag > QPP_N / QPP_M > built-in default for that n."""
    n = n if n is not None else (_env_int("QPP_N") or DEFAULT_N)
    if m is None:
        m = _env_int("QPP_M") or DEFAULT_M.get(n, DEFAULT_M[DEFAULT_N])
    return n, m


def insecure_demo_acknowledged(flag: bool = False) -> bool:
    """``--insecure-demo`` or ``QPP_DEMO_ACK=1``."""
    return flag or env_flag("QPP_DEMO_ACK")


@dataclass(frozen=True)
class Settings:
    n: int = DEFAULT_N
    m: int = DEFAULT_M[DEFAULT_N]
    insecure_demo: bool = False
    read_timeout: float = DEFAULT_READ_TIMEOUT
    record_mac: bool = False
    connect_retries: int = DEFAULT_CONNECT_RETRIES

    @classmethod
    def from_env(
        cls,
        *,
        n: int | None = None,
        m: int | None = None,
        insecure_demo: bool = False,
        read_timeout: float | None = None,
        record_mac: bool | None = None,
        connect_retries: int | None = None,
    ) -> "Settings":
        pad_n, pad_m = resolve_pad_params(n, m)
        if read_timeout is None:
            read_timeout = _env_float("QPP_READ_TIMEOUT") or DEFAULT_READ_TIMEOUT
        if record_mac is None:
            record_mac = env_flag("QPP_RECORD_MAC")
        if connect_retries is None:
            connect_retries = _env_int("QPP_CONNECT_RETRIES") or DEFAULT_CONNECT_RETRIES
        return cls(
            n=pad_n,
            m=pad_m,
            insecure_demo=insecure_demo_acknowledged(insecure_demo),
            read_timeout=read_timeout,
            record_mac=record_mac,
            connect_retries=connect_retries,
        )
