import math
import os

import numpy as np
import pytest

from src.qppnest.analysis.ent import (
    EntAccumulator,
    analyze,
    chi_square,
    entropy,
    format_p_value,
    format_report,
    mean,
    monte_carlo_pi,
    serial_correlation,
)
from src.qppnest.crypto.cipher import CipherSession, encrypt_record
from src.qppnest.errors import InsufficientDataError, UndefinedStatisticError


def test_all_zero_bytes():
    data = bytes(1024)
    assert entropy(data) == 0.0
    assert chi_square(data) == pytest.approx(255 * 1024)
    assert mean(data) == 0.0
    assert monte_carlo_pi(data) == 4.0


def test_every_byte_value_once():
    data = bytes(range(256))
    assert entropy(data) == pytest.approx(8.0)
    assert chi_square(data) == 0.0
    assert mean(data) == 127.5


def test_alternating_extremes_are_anticorrelated():
    assert serial_correlation(bytes([0, 255] * 500)) == pytest.approx(-1.0)


def test_all_ones_never_land_in_circle():
    assert monte_carlo_pi(b"\xff" * 600) == 0.0


def test_serial_correlation_of_constant_data_is_undefined():
    with pytest.raises(UndefinedStatisticError):
        serial_correlation(b"\x07" * 100)


def test_short_inputs():
    with pytest.raises(InsufficientDataError):
        entropy(b"")
    with pytest.raises(InsufficientDataError):
        monte_carlo_pi(b"12345")
    with pytest.raises(InsufficientDataError):
        serial_correlation(b"1")


def test_report_marks_undefined_statistics():
    report = analyze(b"\x41\x41\x41")
    assert report.monte_carlo_pi is None
    assert report.serial_correlation is None
    assert report.reasons["monte_carlo_pi"] == "insufficient data"
    assert "undefined" in report.reasons["serial_correlation"]
    assert "undefined" in format_report(report)


def test_report_for_single_byte():
    report = analyze(b"\x10")
    assert report.byte_count == 1
    assert report.reasons["serial_correlation"] == "insufficient data"


def test_accumulator_matches_one_shot_analysis():
    data = os.urandom(100_003)
    whole = analyze(data)
    acc = EntAccumulator()
    for start, stop in [(0, 1), (1, 5), (5, 4099), (4099, 4099), (4099, 100_003)]:
        acc.update(data[start:stop])
    streamed = acc.report()
    assert streamed.byte_count == whole.byte_count
    assert streamed.entropy == pytest.approx(whole.entropy)
    assert streamed.chi_square == pytest.approx(whole.chi_square)
    assert streamed.mean == pytest.approx(whole.mean)
    assert streamed.monte_carlo_pi == pytest.approx(whole.monte_carlo_pi)
    assert streamed.serial_correlation == pytest.approx(whole.serial_correlation)


def test_one_shot_serial_correlation_matches_numpy():
    data = os.urandom(5000)
    x = np.frombuffer(data, dtype=np.uint8).astype(float)
    expected = np.corrcoef(x, np.roll(x, -1))[0, 1]
    assert serial_correlation(data) == pytest.approx(expected, abs=1e-3)


def test_to_dict_omits_empty_reasons():
    d = analyze(os.urandom(4096)).to_dict()
    assert "reasons" not in d
    assert set(d) >= {"entropy", "chi_square", "p_value", "mean", "monte_carlo_pi", "serial_correlation"}


def test_p_value_display_clamps():
    assert format_p_value(0.00001) == "< 0.0001"
    assert format_p_value(0.999999) == "> 0.9999"
    assert format_p_value(0.5) == "0.50"


def _ciphertext(size: int) -> bytes:
    session = CipherSession.from_session_key(os.urandom(32), 8, 64)
    chunk = 1 << 20
    return b"".join(
        encrypt_record(session, i, bytes(min(chunk, size - off)))
        for i, off in enumerate(range(0, size, chunk))
    )


def test_ciphertext_of_zeros_looks_random():
    report = analyze(_ciphertext(1 << 20))
    assert report.entropy >= 7.999
    assert abs(report.mean - 127.5) <= 0.5
    assert abs(report.monte_carlo_pi - math.pi) <= 0.02
    assert abs(report.serial_correlation) <= 0.01
    assert 1e-4 <= report.p_value <= 1 - 1e-4
