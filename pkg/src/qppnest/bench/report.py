"""Benchmark rows, derived ratios and their CSV / table renderings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable

MB = 1 << 20
CSV_FIELDS = ("name", "bytes", "seconds", "mb_per_s")

QPP_ENCRYPT = "qpp_encrypt"
QPP_DECRYPT = "qpp_decrypt"
AES_CTR = "aes256_ctr"
NESTED = "nested_qpp_aes"
HANDSHAKE = "handshake"
OPENSSL_AES = "openssl_aes256_ctr"

# Published figures the measured ratios are printed next to.
CLAIMED_QPP_VS_AES = 10.0
CLAIMED_NESTED_DROP = 0.10
CLAIMED_HANDSHAKES_PER_S = 5000.0


@dataclass(frozen=True)
class BenchRow:
    name: str
    bytes: int
    seconds: float
    reference_only: bool = False
    operations: int = 0

    @property
    def mb_per_s(self) -> float:
        return self.bytes / MB / self.seconds if self.seconds > 0 else 0.0

    @property
    def ops_per_s(self) -> float:
        return self.operations / self.seconds if self.seconds > 0 else 0.0


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def row(self, name: str) -> BenchRow | None:
        for r in self.rows:
            if r.name == name:
                return r
        return None

    def _throughput(self, name: str) -> float | None:
        r = self.row(name)
        return r.mb_per_s if r is not None and r.seconds > 0 else None

    @property
    def qpp_vs_aes(self) -> float | None:
        qpp, aes = self._throughput(QPP_ENCRYPT), self._throughput(AES_CTR)
        return qpp / aes if qpp and aes else None

    @property
    def nested_vs_aes_only(self) -> float | None:
        """Nested throughput as a fraction of AES-only throughput."""
        nested, aes = self._throughput(NESTED), self._throughput(AES_CTR)
        return nested / aes if nested and aes else None

    @property
    def pipeline_overhead(self) -> float | None:
        """nested time / (QPP-only time + AES-only time), per byte."""
        qpp, aes, nested = self.row(QPP_ENCRYPT), self.row(AES_CTR), self.row(NESTED)
        if not (qpp and aes and nested):
            return None
        if not (qpp.bytes and aes.bytes and nested.bytes):
            return None
        qpp_cost = qpp.seconds / qpp.bytes
        aes_cost = aes.seconds / aes.bytes
        return (nested.seconds / nested.bytes) / (qpp_cost + aes_cost)

    @property
    def handshakes_per_second(self) -> float | None:
        r = self.row(HANDSHAKE)
        return r.ops_per_s if r is not None and r.operations else None

    def ratios(self) -> dict[str, float | None]:
        return {
            "qpp_vs_aes": self.qpp_vs_aes,
            "nested_vs_aes_only": self.nested_vs_aes_only,
            "pipeline_overhead": self.pipeline_overhead,
            "handshakes_per_second": self.handshakes_per_second,
        }


def write_csv(rows: Iterable[BenchRow], stream: io.TextIOBase) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow([r.name, r.bytes, f"{r.seconds:.6f}", f"{r.mb_per_s:.3f}"])


def to_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    write_csv(report.rows, buf)
    return buf.getvalue()


def read_csv(text: str) -> list[BenchRow]:
    reader = csv.DictReader(io.StringIO(text))
    return [BenchRow(r["name"], int(r["bytes"]), float(r["seconds"])) for r in reader]


def _fmt(value: float | None, spec: str) -> str:
    return "n/a" if value is None else format(value, spec)


def format_table(report: BenchReport) -> str:
    lines = [f"{'pipeline':<22} {'bytes':>14} {'seconds':>10} {'MB/s':>10}"]
    lines.append("-" * len(lines[0]))
    for r in report.rows:
        note = "  (reference only)" if r.reference_only else ""
        lines.append(f"{r.name:<22} {r.bytes:>14,} {r.seconds:>10.4f} {r.mb_per_s:>10.2f}{note}")
    lines.append("")
    lines.append(
        f"QPP vs software AES-256-CTR : {_fmt(report.qpp_vs_aes, '.2f')}x "
        f"(claimed > {CLAIMED_QPP_VS_AES:.0f}x)"
    )
    drop = None if report.nested_vs_aes_only is None else 1.0 - report.nested_vs_aes_only
    lines.append(
        f"Nested vs AES only          : {_fmt(report.nested_vs_aes_only, '.3f')} "
        f"(drop {_fmt(drop, '.1%')}, claimed < {CLAIMED_NESTED_DROP:.0%})"
    )
    lines.append(f"Pipeline overhead           : {_fmt(report.pipeline_overhead, '.3f')} of QPP + AES time")
    lines.append(
        f"Handshakes per second       : {_fmt(report.handshakes_per_second, ',.0f')} "
        f"(claimed ~{CLAIMED_HANDSHAKES_PER_S:,.0f} with real PQC KEMs)"
    )
    return "\n".join(lines)
