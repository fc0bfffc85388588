import math

import pytest

from src.qppnest.analysis.corpus import english_corpus
from src.qppnest.analysis.ent import analyze
from src.qppnest.crypto.cipher import CipherSession, encrypt_record

TABLE_KEY = bytes.fromhex("8f1e2d3c4b5a69788796a5b4c3d2e1f00f1e2d3c4b5a69788796a5b4c3d2e1f0")


def test_exact_size_and_ascii():
    for size in (0, 1, 1000, 65_537):
        text = english_corpus(size)
        assert len(text) == size
        assert all(b < 128 for b in text)


def test_deterministic_for_a_seed():
    assert english_corpus(20_000) == english_corpus(20_000)
    assert english_corpus(20_000, seed=1) != english_corpus(20_000, seed=2)


def test_text_has_sentences_and_lines():
    text = english_corpus(50_000)
    assert b". " in text
    assert b"\n" in text


def test_corpus_is_strongly_biased():
    report = analyze(english_corpus(1 << 20))
    assert 3.5 <= report.entropy <= 5.0
    assert 75.0 <= report.mean <= 110.0
    assert report.monte_carlo_pi == 4.0
    assert report.p_value < 1e-4


@pytest.mark.slow
def test_ciphertext_of_ten_megabytes_of_text_meets_randomness_bands():
    session = CipherSession.from_session_key(TABLE_KEY, 8, 64)
    plaintext = english_corpus(10 << 20)
    chunk = 1 << 20
    ciphertext = b"".join(
        encrypt_record(session, i, plaintext[off:off + chunk])
        for i, off in enumerate(range(0, len(plaintext), chunk))
    )
    report = analyze(ciphertext)
    assert report.entropy >= 7.9999
    assert abs(report.mean - 127.5) <= 0.1
    assert abs(report.monte_carlo_pi - math.pi) <= 0.005
    assert abs(report.serial_correlation) <= 0.002
    assert 0.01 <= report.p_value <= 0.99
