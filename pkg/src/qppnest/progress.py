"""Real-time progress logging for benchmarks, handshakes and tunnels.

Everything is written to stderr: stdout belongs to tunnel payloads, reports
and CSV.
"""

from __future__ import annotations

import sys
import threading
import time

_GREY = "\033[90m"
_CYAN = "\033[36m"
_GREEN = "\033[32m"
_YELLOW = "\033[33m"
_RED = "\033[31m"
_RESET = "\033[0m"
_BOLD = "\033[1m"


def _emit(line: str) -> None:
    print(line, file=sys.stderr, flush=True)


def log_stage_start(stage: str) -> None:
    """Print a boxed stage banner."""
    label = stage.upper().replace("_", " ")
    sep = "─" * 60
    _emit(f"\n┌{sep}┐")
    _emit(f"│ {_BOLD}{label:^58}{_RESET} │")
    _emit(f"└{sep}┘")


def log_stage_done(stage: str, elapsed: float, detail: str = "") -> None:
    parts = [f"{elapsed:.2f}s"]
    if detail:
        parts.append(detail)
    _emit(f"  {_GREEN}✓ {stage} complete ({', '.join(parts)}){_RESET}")


def log_route(step: int, total: int, stage: str, reason: str) -> None:
    """Print the benchmark router's decision."""
    _emit(f"\n{_CYAN}▸ Bench [{step}/{total}]:{_RESET} {_BOLD}{stage}{_RESET}")
    _emit(f"  {_GREY}{reason}{_RESET}")


def log_bench_row(name: str, nbytes: int, seconds: float, mb_per_s: float) -> None:
    _emit(f"  {_GREY}◉ {name:<22} {nbytes:>14,} bytes  {seconds:9.4f}s  {mb_per_s:10.2f} MB/s{_RESET}")


def log_handshake(role: str, event: str) -> None:
    _emit(f"  {_CYAN}⇄ {role:<6}{_RESET} {event}")


def log_tunnel(event: str) -> None:
    _emit(f"  {_CYAN}◎ tunnel{_RESET} {event}")


def log_warning(message: str) -> None:
    _emit(f"  {_YELLOW}⚠ {message}{_RESET}")


def log_error(message: str) -> None:
    _emit(f"  {_RED}✗ {message}{_RESET}")


def log_insecure_demo() -> None:
    """Loud banner shown whenever the mock KEM drives a real connection."""
    sep = "!" * 60
    _emit(f"{_RED}{_BOLD}{sep}")
    _emit("  INSECURE DEMO: handshake uses the MOCK KEM.")
    _emit("  Its shared secret is computable from public values.")
    _emit("  Nothing sent over this tunnel is confidential.")
    _emit(f"{sep}{_RESET}")


class Spinner:
    """Simple terminal spinner for long-running measurements."""

    _FRAMES = ["⠋", "⠙", "⠹", "⠸", "⠼", "⠴", "⠦", "⠧", "⠇", "⠏"]

    def __init__(self, label: str) -> None:
        self._label = label
        self._running = False
        self._thread: threading.Thread | None = None

    def __enter__(self) -> "Spinner":
        self.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()

    def start(self) -> None:
        if not sys.stderr.isatty():
            return
        self._running = True
        self._thread = threading.Thread(target=self._spin, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if not self._running:
            return
        self._running = False
        if self._thread:
            self._thread.join()
        sys.stderr.write("\r" + " " * 80 + "\r")
        sys.stderr.flush()

    def _spin(self) -> None:
        i = 0
        t0 = time.time()
        while self._running:
            elapsed = time.time() - t0
            frame = self._FRAMES[i % len(self._FRAMES)]
            sys.stderr.write(f"\r  {_GREY}{frame} {self._label} ({elapsed:.0f}s){_RESET}")
            sys.stderr.flush()
            time.sleep(0.1)
            i += 1
