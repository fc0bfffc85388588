"""Random and mutated inputs to every decoder must fail only with QppError."""

import random

import pytest

from src.qppnest.channel.handshake import ChannelConfig, client_init, server_respond
from src.qppnest.channel.kem import MockKem
from src.qppnest.channel.messages import ClientHello, ServerHello
from src.qppnest.channel.records import Record, RecordReader, RecordType, decode_record, encode_record, parse_alert
from src.qppnest.crypto.pad import export_pad, generate_pad, load_pad
from src.qppnest.errors import QppError
from tests.conftest import FUZZ_ITERATIONS

pytestmark = pytest.mark.fuzz


def _samples():
    config = ChannelConfig(kems=(MockKem(acknowledge_insecure=True),))
    _, hello = client_init(config, bytes(32))
    _, reply = server_respond(config, hello, bytes([1]) * 32, bytes([2]) * 32)
    return {
        "record": (decode_record, encode_record(Record(RecordType.DATA, 3, b"sample payload"))),
        "client_hello": (ClientHello.decode, hello.encode()),
        "server_hello": (ServerHello.decode, reply.encode()),
        "alert": (parse_alert, b"\x02\x28"),
        "pad": (load_pad, export_pad(generate_pad(bytes(32), 4, 8))),
    }


SAMPLES = _samples()


def _mutate(rng: random.Random, data: bytes) -> bytes:
    out = bytearray(data)
    for _ in range(rng.randint(1, 4)):
        action = rng.randrange(4)
        if action == 0 and out:
            out[rng.randrange(len(out))] ^= 1 << rng.randrange(8)
        elif action == 1 and out:
            del out[rng.randrange(len(out)):]
        elif action == 2:
            pos = rng.randrange(len(out) + 1)
            out[pos:pos] = rng.randbytes(rng.randint(1, 8))
        elif out:
            out[rng.randrange(len(out))] = rng.randrange(256)
    return bytes(out)


def _only_qpp_errors(decode, data: bytes) -> None:
    try:
        decode(data)
    except QppError:
        pass


@pytest.mark.parametrize("name", sorted(SAMPLES))
def test_random_bytes(name):
    decode, _ = SAMPLES[name]
    rng = random.Random(name)
    for _ in range(FUZZ_ITERATIONS):
        _only_qpp_errors(decode, rng.randbytes(rng.randint(0, 160)))


@pytest.mark.parametrize("name", sorted(SAMPLES))
def test_mutated_valid_messages(name):
    decode, sample = SAMPLES[name]
    rng = random.Random(name + "/mutate")
    for _ in range(FUZZ_ITERATIONS):
        _only_qpp_errors(decode, _mutate(rng, sample))


def test_stream_reader_with_random_chunks():
    rng = random.Random(99)
    sample = SAMPLES["record"][1]
    for _ in range(FUZZ_ITERATIONS // 10):
        reader = RecordReader()
        stream = b"".join(_mutate(rng, sample) if rng.random() < 0.3 else sample for _ in range(5))
        try:
            pos = 0
            while pos < len(stream):
                step = rng.randint(1, 40)
                reader.feed(stream[pos:pos + step])
                pos += step
            reader.close()
        except QppError:
            pass
