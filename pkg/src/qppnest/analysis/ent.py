"""Byte-level randomness statistics in the manner of the classic ENT tool.

Entropy, chi-square (with exact p-value), arithmetic mean, Monte Carlo pi
and lag-1 serial correlation. Monte Carlo uses consecutive 6-byte groups as
two 24-bit coordinates; serial correlation wraps the last byte around to
the first. :class:`EntAccumulator` computes the same numbers over a stream
of chunks by merging sufficient statistics.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from src.qppnest.analysis.special import chi_square_p_value
from src.qppnest.errors import InsufficientDataError, UndefinedStatisticError

BINS = 256
DEFAULT_DOF = BINS - 1
MONTE_CARLO_GROUP = 6
_COORD_MAX = (1 << 24) - 1
_IN_CIRCLE = _COORD_MAX * _COORD_MAX

# Display clamps for p-values, the way ENT reports its extreme tails.
P_DISPLAY_FLOOR = 0.0001
P_DISPLAY_CEIL = 0.9999

ROW_LABELS = {
    "entropy": "Entropy (bits)",
    "chi_square": "Chi Square",
    "p_value": "p-Value",
    "mean": "Arithmetic Mean",
    "monte_carlo_pi": "Monte Carlo π",
    "serial_correlation": "Serial Correlation",
}

IDEAL_VALUES = {
    "entropy": 8.0,
    "chi_square": float(DEFAULT_DOF + 1),
    "p_value": 0.5,
    "mean": 127.5,
    "monte_carlo_pi": math.pi,
    "serial_correlation": 0.0,
}


def _as_array(data) -> np.ndarray:
    return np.frombuffer(data, dtype=np.uint8)


def histogram(data) -> np.ndarray:
    return np.bincount(_as_array(data), minlength=BINS).astype(np.int64)


def _require(count: int, minimum: int, what: str) -> None:
    if count < minimum:
        raise InsufficientDataError(f"{what} needs at least {minimum} bytes, got {count}")


def _entropy_from_counts(counts: np.ndarray) -> float:
    total = int(counts.sum())
    probs = counts[counts > 0] / total
    return float(max(0.0, -(probs * np.log2(probs)).sum()))


def _chi_square_from_counts(counts: np.ndarray) -> float:
    total = int(counts.sum())
    expected = total / BINS
    return float(((counts - expected) ** 2).sum() / expected)


def _mean_from_counts(counts: np.ndarray) -> float:
    return float((counts * np.arange(BINS)).sum() / counts.sum())


def entropy(data) -> float:
    """Shannon entropy in bits per byte."""
    counts = histogram(data)
    _require(int(counts.sum()), 1, "entropy")
    return _entropy_from_counts(counts)


def chi_square(data) -> float:
    counts = histogram(data)
    _require(int(counts.sum()), 1, "chi-square")
    return _chi_square_from_counts(counts)


def mean(data) -> float:
    counts = histogram(data)
    _require(int(counts.sum()), 1, "mean")
    return _mean_from_counts(counts)


def _monte_carlo_counts(arr: np.ndarray) -> tuple[int, int]:
    groups = arr.size // MONTE_CARLO_GROUP
    if groups == 0:
        return 0, 0
    g = arr[: groups * MONTE_CARLO_GROUP].reshape(groups, MONTE_CARLO_GROUP).astype(np.int64)
    x = (g[:, 0] << 16) | (g[:, 1] << 8) | g[:, 2]
    y = (g[:, 3] << 16) | (g[:, 4] << 8) | g[:, 5]
    inside = int(np.count_nonzero(x * x + y * y <= _IN_CIRCLE))
    return inside, groups


def monte_carlo_pi(data) -> float:
    arr = _as_array(data)
    if arr.size < MONTE_CARLO_GROUP:
        raise InsufficientDataError(
            f"insufficient data: Monte Carlo needs {MONTE_CARLO_GROUP} bytes, got {arr.size}"
        )
    inside, total = _monte_carlo_counts(arr)
    return 4.0 * inside / total


def _serial_ratio(n: int, sum_x: int, sum_x2: int, sum_xy: int) -> float:
    denominator = n * sum_x2 - sum_x * sum_x
    if denominator == 0:
        raise UndefinedStatisticError("undefined: serial correlation of constant data")
    return (n * sum_xy - sum_x * sum_x) / denominator


def serial_correlation(data) -> float:
    """Lag-1 correlation, pairing the last byte with the first."""
    arr = _as_array(data)
    _require(arr.size, 2, "serial correlation")
    x = arr.astype(np.int64)
    sum_xy = int((x * np.roll(x, -1)).sum())
    return _serial_ratio(arr.size, int(x.sum()), int((x * x).sum()), sum_xy)


@dataclass
class EntReport:
    byte_count: int
    entropy: float
    chi_square: float
    p_value: float
    mean: float
    monte_carlo_pi: float | None = None
    serial_correlation: float | None = None
    reasons: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        if not self.reasons:
            out.pop("reasons")
        return out

    @property
    def monte_carlo_error(self) -> float | None:
        if self.monte_carlo_pi is None:
            return None
        return abs(self.monte_carlo_pi - math.pi) / math.pi


def format_p_value(p: float) -> str:
    if p < P_DISPLAY_FLOOR:
        return f"< {P_DISPLAY_FLOOR}"
    if p > P_DISPLAY_CEIL:
        return f"> {P_DISPLAY_CEIL}"
    return f"{p:.2f}"


def format_value(name: str, value: float | None, reason: str | None = None) -> str:
    if value is None:
        return f"undefined ({reason})" if reason else "undefined"
    if name == "entropy":
        return f"{value:.6f}"
    if name == "chi_square":
        return f"{value:.2f}"
    if name == "p_value":
        return format_p_value(value)
    if name == "mean":
        return f"{value:.4f}"
    if name == "monte_carlo_pi":
        return f"{value:.8f}"
    return f"{value:.6f}"


def format_report(report: EntReport) -> str:
    """One statistic per line, labelled like the ENT comparison table."""
    lines = [f"{'Byte Count':<20}{report.byte_count}"]
    for name, label in ROW_LABELS.items():
        value = getattr(report, name)
        lines.append(f"{label:<20}{format_value(name, value, report.reasons.get(name))}")
    return "\n".join(lines)


class EntAccumulator:
    """Streaming ENT over chunks; results equal those of one-shot ``analyze``."""

    def __init__(self) -> None:
        self.counts = np.zeros(BINS, dtype=np.int64)
        self.byte_count = 0
        self._sum_x = 0
        self._sum_x2 = 0
        self._sum_xy = 0
        self._first: int | None = None
        self._last: int | None = None
        self._mc_tail = np.empty(0, dtype=np.uint8)
        self._mc_inside = 0
        self._mc_total = 0

    def update(self, chunk) -> "EntAccumulator":
        arr = _as_array(chunk)
        if arr.size == 0:
            return self
        self.counts += np.bincount(arr, minlength=BINS)
        self.byte_count += arr.size

        x = arr.astype(np.int64)
        self._sum_x += int(x.sum())
        self._sum_x2 += int((x * x).sum())
        self._sum_xy += int((x[:-1] * x[1:]).sum())
        if self._last is not None:
            self._sum_xy += self._last * int(x[0])
        if self._first is None:
            self._first = int(x[0])
        self._last = int(x[-1])

        mc = np.concatenate([self._mc_tail, arr]) if self._mc_tail.size else arr
        inside, total = _monte_carlo_counts(mc)
        self._mc_inside += inside
        self._mc_total += total
        self._mc_tail = mc[total * MONTE_CARLO_GROUP:].copy()
        return self

    def report(self) -> EntReport:
        _require(self.byte_count, 1, "analysis")
        chi2 = _chi_square_from_counts(self.counts)
        reasons: dict[str, str] = {}

        pi_estimate = None
        if self._mc_total:
            pi_estimate = 4.0 * self._mc_inside / self._mc_total
        else:
            reasons["monte_carlo_pi"] = "insufficient data"

        scc = None
        if self.byte_count < 2:
            reasons["serial_correlation"] = "insufficient data"
        else:
            sum_xy = self._sum_xy + self._last * self._first
            try:
                scc = _serial_ratio(self.byte_count, self._sum_x, self._sum_x2, sum_xy)
            except UndefinedStatisticError:
                reasons["serial_correlation"] = "undefined (all bytes equal)"

        return EntReport(
            byte_count=self.byte_count,
            entropy=_entropy_from_counts(self.counts),
            chi_square=chi2,
            p_value=chi_square_p_value(chi2, DEFAULT_DOF),
            mean=_mean_from_counts(self.counts),
            monte_carlo_pi=pi_estimate,
            serial_correlation=scc,
            reasons=reasons,
        )


def analyze(data) -> EntReport:
    return EntAccumulator().update(data).report()
