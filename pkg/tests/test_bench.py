import io
import os

import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from src.qppnest.bench.graph import FINISH, build_graph, route_after_router, router, run_bench
from src.qppnest.bench.pipelines import PIPELINES, BenchContext, _counter_at
from src.qppnest.bench.report import (
    AES_CTR,
    HANDSHAKE,
    MB,
    NESTED,
    OPENSSL_AES,
    QPP_DECRYPT,
    QPP_ENCRYPT,
    BenchReport,
    BenchRow,
    format_table,
    read_csv,
    to_csv,
    write_csv,
)
from src.qppnest.crypto.aes_ref import aes256_ctr
from src.qppnest.errors import ParameterError


def _report(**overrides) -> BenchReport:
    rows = {
        QPP_ENCRYPT: BenchRow(QPP_ENCRYPT, 8 * MB, 1.0),
        AES_CTR: BenchRow(AES_CTR, 8 * MB, 4.0),
        NESTED: BenchRow(NESTED, 8 * MB, 5.5),
        HANDSHAKE: BenchRow(HANDSHAKE, 5000 * 180, 0.5, operations=5000),
        OPENSSL_AES: BenchRow(OPENSSL_AES, 8 * MB, 0.01, reference_only=True),
    }
    rows.update(overrides)
    return BenchReport([r for r in rows.values() if r is not None])


def test_row_throughput():
    row = BenchRow("x", 2 * MB, 0.5)
    assert row.mb_per_s == 4.0
    assert BenchRow("x", MB, 0.0).mb_per_s == 0.0
    assert BenchRow("h", 0, 2.0, operations=100).ops_per_s == 50.0


def test_ratios():
    ratios = _report().ratios()
    assert ratios["qpp_vs_aes"] == pytest.approx(4.0)
    assert ratios["nested_vs_aes_only"] == pytest.approx(4.0 / 5.5)
    assert ratios["pipeline_overhead"] == pytest.approx(5.5 / 5.0)
    assert ratios["handshakes_per_second"] == pytest.approx(10_000)


def test_reference_row_is_ignored_by_ratios():
    with_ref = _report().ratios()
    without_ref = _report(**{OPENSSL_AES: None}).ratios()
    assert with_ref == without_ref


def test_missing_rows_give_no_ratio():
    report = BenchReport([BenchRow(QPP_ENCRYPT, MB, 1.0)])
    assert set(report.ratios().values()) == {None}
    assert "n/a" in format_table(report)


def test_csv_layout():
    buf = io.StringIO()
    write_csv([BenchRow(QPP_ENCRYPT, 3 * MB, 1.5)], buf)
    assert buf.getvalue() == "name,bytes,seconds,mb_per_s\nqpp_encrypt,3145728,1.500000,2.000\n"


def test_csv_read_back():
    report = _report()
    rows = read_csv(to_csv(report))
    assert [r.name for r in rows] == [r.name for r in report.rows]
    assert rows[0].bytes == 8 * MB
    assert rows[1].seconds == pytest.approx(4.0)


def test_table_mentions_claims_and_reference_rows():
    table = format_table(_report())
    assert "(reference only)" in table
    assert "4.00x" in table
    assert "claimed > 10x" in table
    assert "10,000" in table


def test_context_validation():
    with pytest.raises(ParameterError):
        BenchContext.random(1024, repeat=0)
    with pytest.raises(ParameterError):
        BenchContext.random(1024, threads=0)
    with pytest.raises(ParameterError):
        BenchContext.random(1024, chunk_size=1000)


def test_chunks_carry_index_and_offset():
    ctx = BenchContext.random(40_000, chunk_size=16_384)
    chunks = ctx.chunks()
    assert [(i, off, len(c)) for i, off, c in chunks] == [(0, 0, 16_384), (1, 16_384, 16_384), (2, 32_768, 7_232)]


def test_openssl_counter_matches_offset_processing():
    key, iv, data = os.urandom(32), bytes(8) + b"\xff" * 8, os.urandom(100)
    encryptor = Cipher(algorithms.AES(key), modes.CTR(_counter_at(iv, 64))).encryptor()
    assert encryptor.update(data) + encryptor.finalize() == aes256_ctr(key, iv, data, offset=64)


def test_router_walks_pending_pipelines(capsys):
    update = router({"rows": [], "pending": [QPP_ENCRYPT, AES_CTR], "current": "", "step": 0, "total": 2})
    assert update == {"current": QPP_ENCRYPT, "pending": [AES_CTR], "step": 1}
    assert "[1/2]" in capsys.readouterr().err
    assert router({"rows": [], "pending": [], "current": AES_CTR, "step": 2, "total": 2}) == {"current": FINISH}
    assert route_after_router({"current": FINISH}) == FINISH
    assert route_after_router({"current": NESTED}) == NESTED


def test_unknown_pipeline_is_rejected():
    with pytest.raises(ParameterError):
        build_graph(BenchContext.random(1024), ["qpp_encrypt", "rot13"])


@pytest.mark.parametrize("threads", [1, 2])
def test_run_bench_produces_every_row_in_order(threads):
    ctx = BenchContext.random(64 * 1024, repeat=1, threads=threads, handshakes=5, chunk_size=16_384)
    report = run_bench(ctx)
    assert [r.name for r in report.rows] == list(PIPELINES)
    for row in report.rows:
        assert row.seconds > 0
    assert report.row(QPP_ENCRYPT).bytes == 64 * 1024
    assert report.row(QPP_DECRYPT).bytes == 64 * 1024
    handshake = report.row(HANDSHAKE)
    assert handshake.operations == 5
    assert handshake.bytes > 0 and handshake.bytes % 5 == 0
    assert report.row(OPENSSL_AES).reference_only


def test_run_bench_subset_and_duplicates():
    ctx = BenchContext.random(32 * 1024, repeat=1, handshakes=2, chunk_size=16_384)
    report = run_bench(ctx, [AES_CTR, QPP_ENCRYPT, AES_CTR])
    assert [r.name for r in report.rows] == [AES_CTR, QPP_ENCRYPT]
    assert report.qpp_vs_aes is not None


@pytest.mark.bench
def test_performance_targets():
    ctx = BenchContext.random(64 * MB, repeat=3, handshakes=5000)
    report = run_bench(ctx, [QPP_ENCRYPT, AES_CTR, NESTED, HANDSHAKE])
    print(format_table(report))
    assert report.qpp_vs_aes >= 2.0
    assert report.pipeline_overhead <= 1.15
    assert report.handshakes_per_second >= 5000
