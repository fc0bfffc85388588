"""CLI entry point for the QPP toolkit and nested-channel tunnel."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from src.qppnest.analysis.corpus import english_corpus
from src.qppnest.analysis.ent import IDEAL_VALUES, ROW_LABELS, EntAccumulator, format_report, format_value
from src.qppnest.bench.graph import DEFAULT_PIPELINES, run_bench
from src.qppnest.bench.pipelines import BenchContext
from src.qppnest.bench.report import MB, format_table, to_csv
from src.qppnest.config import Settings
from src.qppnest.crypto.cipher import CipherSession, decrypt_record, encrypt_record
from src.qppnest.crypto.keystream import hkdf_sha256
from src.qppnest.crypto.pad import export_pad, generate_pad, load_pad, validate_pad_params
from src.qppnest.errors import (
    DecodeError,
    HandshakeError,
    InsecureKemError,
    ParameterError,
    QppError,
    QppIOError,
    ReplayError,
)
from src.qppnest.files import iter_chunks, read_bytes, read_key_file, write_bytes, write_key_file
from src.qppnest.net import parse_address
from src.qppnest.progress import Spinner, log_error, log_insecure_demo, log_stage_done
from src.qppnest.tunnel.outer import OuterLayer, OuterMode
from src.qppnest.tunnel.service import ServeTarget, TunnelOptions, TunnelServer, run_client

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_HANDSHAKE = 3
EXIT_IO = 4

KEYGEN_INFO = b"QPP/keygen/v1"
TABLE_KEY = hashlib.sha256(b"qppnest table key").digest()


def _settings(args: argparse.Namespace) -> Settings:
    settings = Settings.from_env(
        n=getattr(args, "n", None),
        m=getattr(args, "M", None),
        insecure_demo=getattr(args, "insecure_demo", False),
        read_timeout=getattr(args, "timeout", None),
        record_mac=True if getattr(args, "record_mac", False) else None,
    )
    validate_pad_params(settings.n, settings.m)
    return settings


def cmd_keygen(args: argparse.Namespace) -> int:
    if args.seed is not None:
        try:
            seed = bytes.fromhex(args.seed)
        except ValueError as exc:
            raise ParameterError(f"--seed must be hex: {exc}") from exc
        if not seed:
            raise ParameterError("--seed must not be empty")
        key = hkdf_sha256(seed, b"", KEYGEN_INFO, 32)
    else:
        key = os.urandom(32)
    write_key_file(args.out, key)
    print(f"wrote 32-byte key to {args.out}", file=sys.stderr)
    return EXIT_OK


def _file_cipher(args: argparse.Namespace) -> CipherSession:
    settings = _settings(args)
    key = read_key_file(args.key)
    return CipherSession.from_session_key(key, settings.n, settings.m)


def cmd_encrypt(args: argparse.Namespace) -> int:
    session = _file_cipher(args)
    write_bytes(args.output, encrypt_record(session, args.seq, read_bytes(args.input)))
    return EXIT_OK


def cmd_decrypt(args: argparse.Namespace) -> int:
    session = _file_cipher(args)
    write_bytes(args.output, decrypt_record(session, args.seq, read_bytes(args.input)))
    return EXIT_OK


def cmd_ent(args: argparse.Namespace) -> int:
    acc = EntAccumulator()
    for chunk in iter_chunks(args.input):
        acc.update(chunk)
    report = acc.report()
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(format_report(report))
    return EXIT_OK


def cmd_table(args: argparse.Namespace) -> int:
    """Plaintext / ciphertext / ideal ENT columns for an English-like corpus."""
    settings = _settings(args)
    key = read_key_file(args.key) if args.key else TABLE_KEY
    with Spinner("Building corpus and encrypting"):
        plaintext = english_corpus(int(args.size * MB))
        session = CipherSession.from_session_key(key, settings.n, settings.m)
        ciphertext = encrypt_record(session, 0, plaintext)
        reports = {
            "Plaintext": EntAccumulator().update(plaintext).report(),
            "Ciphertext": EntAccumulator().update(ciphertext).report(),
        }
    header = f"{'':<20}{'Plaintext':>16}{'Ciphertext':>16}{'Ideal':>16}"
    print(header)
    print("-" * len(header))
    print(f"{'Byte Count':<20}{len(plaintext):>16}{len(ciphertext):>16}{'':>16}")
    for name, label in ROW_LABELS.items():
        cells = [
            format_value(name, getattr(r, name), r.reasons.get(name)) for r in reports.values()
        ]
        ideal = format_value(name, IDEAL_VALUES[name])
        print(f"{label:<20}{cells[0]:>16}{cells[1]:>16}{ideal:>16}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    settings = _settings(args)
    if args.size < 1:
        raise ParameterError("--size must be at least 1 MB")
    pipelines = args.pipelines.split(",") if args.pipelines else list(DEFAULT_PIPELINES)
    ctx = BenchContext.random(
        args.size * MB,
        n=settings.n,
        m=settings.m,
        repeat=args.repeat,
        threads=args.threads,
        handshakes=args.handshakes,
    )
    report = run_bench(ctx, pipelines)
    table = format_table(report)
    if args.csv == "-":
        print(table, file=sys.stderr)
        sys.stdout.write(to_csv(report))
    else:
        print(table)
        if args.csv:
            write_bytes(args.csv, to_csv(report).encode())
    return EXIT_OK


def _tunnel_options(args: argparse.Namespace) -> TunnelOptions:
    settings = _settings(args)
    if not settings.insecure_demo:
        raise InsecureKemError(
            "the tunnel handshake uses the insecure mock KEM; pass --insecure-demo or set QPP_DEMO_ACK=1"
        )
    outer = OuterMode(args.outer)
    outer_key = read_key_file(args.key) if args.key else None
    OuterLayer(outer, outer_key)
    log_insecure_demo()
    return TunnelOptions(settings=settings, outer=outer, outer_key=outer_key)


def cmd_serve(args: argparse.Namespace) -> int:
    options = _tunnel_options(args)
    target = ServeTarget(echo=args.echo, forward=parse_address(args.forward) if args.forward else None)
    max_connections = args.max_connections
    if not (target.echo or target.forward) and max_connections is None:
        # stdio can only back one connection
        max_connections = 1
    server = TunnelServer(parse_address(args.listen), options, target, max_connections=max_connections)
    with server:
        server.serve_forever()
    return EXIT_OK


def cmd_connect(args: argparse.Namespace) -> int:
    options = _tunnel_options(args)
    local = parse_address(args.local) if args.local else None
    t0 = time.time()
    sent, received = run_client(parse_address(args.target), options, local=local)
    log_stage_done("tunnel", time.time() - t0, f"{sent:,} bytes sent, {received:,} bytes received")
    return EXIT_OK


def cmd_pad_export(args: argparse.Namespace) -> int:
    settings = _settings(args)
    pad = generate_pad(read_key_file(args.key), settings.n, settings.m)
    write_bytes(args.out, export_pad(pad))
    return EXIT_OK


def cmd_pad_inspect(args: argparse.Namespace) -> int:
    data = read_bytes(args.input)
    pad = load_pad(data)
    print(f"n = {pad.n}, M = {pad.m}, {pad.size} symbols per gate")
    print(f"fingerprint  {hashlib.sha256(data).hexdigest()[:32]}")
    preview = " ".join(f"{v:02x}" for v in pad.gates[0][:16])
    print(f"gate 0       {preview} ...")
    return EXIT_OK


def _add_pad_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, choices=(4, 8), default=None, help="bits per symbol (default 8)")
    p.add_argument("--M", type=int, default=None, help="number of gates (default 64 for n=8, 8 for n=4)")


def _add_tunnel_flags(p: argparse.ArgumentParser) -> None:
    _add_pad_flags(p)
    p.add_argument("--key", help="outer key file (required with --outer aes)")
    p.add_argument("--outer", choices=[m.value for m in OuterMode], default=OuterMode.NONE.value)
    p.add_argument("--insecure-demo", action="store_true", help="acknowledge the mock KEM is insecure")
    p.add_argument("--record-mac", action="store_true", help="append HMAC-SHA-256 to every record")
    p.add_argument("--timeout", type=float, default=None, help="read timeout in seconds (default 30)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qppnest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="write a 32-byte session key file")
    p.add_argument("out")
    p.add_argument("--seed", help="hex seed for a deterministic key (testing only)")
    p.set_defaults(func=cmd_keygen)

    for name, func in (("encrypt", cmd_encrypt), ("decrypt", cmd_decrypt)):
        p = sub.add_parser(name, help=f"{name} a file as one QPP record")
        p.add_argument("--key", required=True)
        p.add_argument("input")
        p.add_argument("output")
        p.add_argument("--seq", type=int, default=0)
        _add_pad_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("ent", help="ENT-style randomness statistics of a file")
    p.add_argument("input")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ent)

    p = sub.add_parser("table", help="ENT comparison of an English corpus and its QPP ciphertext")
    p.add_argument("--size", type=float, default=10.0, help="corpus size in MB (default 10)")
    p.add_argument("--key", help="session key file (default: fixed test key)")
    _add_pad_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bench", help="throughput and handshake benchmark")
    p.add_argument("--size", type=int, default=16, help="buffer size in MB (default 16)")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--csv", help="write rows as CSV to this path ('-' for stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--handshakes", type=int, default=1000)
    p.add_argument("--pipelines", help=f"comma-separated subset of: {', '.join(DEFAULT_PIPELINES)}")
    _add_pad_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="accept nested-channel tunnel connections")
    p.add_argument("--listen", required=True, help="host:port (port 0 picks a free port)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--echo", action="store_true", help="echo tunnel data back")
    mode.add_argument("--forward", help="relay tunnel data to host:port")
    p.add_argument("--max-connections", type=int, default=None)
    _add_tunnel_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("connect", help="open a tunnel and relay stdio or one local TCP client")
    p.add_argument("--target", required=True, help="server host:port")
    p.add_argument("--local", help="accept one local TCP client on host:port instead of stdio")
    _add_tunnel_flags(p)
    p.set_defaults(func=cmd_connect)

    p = sub.add_parser("pad", help="export or inspect a permutation pad")
    pad_sub = p.add_subparsers(dest="pad_command", required=True)
    q = pad_sub.add_parser("export", help="derive a pad from a key file and write it")
    q.add_argument("--key", required=True)
    q.add_argument("out")
    _add_pad_flags(q)
    q.set_defaults(func=cmd_pad_export)
    q = pad_sub.add_parser("inspect", help="validate and summarise a pad file")
    q.add_argument("input")
    q.set_defaults(func=cmd_pad_inspect)

    return parser


def exit_code_for(exc: QppError) -> int:
    if isinstance(exc, (HandshakeError, DecodeError, ReplayError)):
        return EXIT_HANDSHAKE
    if isinstance(exc, QppIOError):
        return EXIT_IO
    return EXIT_USAGE


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QppError as exc:
        log_error(str(exc))
        return exit_code_for(exc)
    except KeyboardInterrupt:
        log_error("interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
