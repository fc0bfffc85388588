from src.qppnest.analysis.ent import analyze
from src.qppnest.bench.graph import build_graph, run_bench
from src.qppnest.crypto.cipher import CipherSession, decrypt_record, encrypt_record
from src.qppnest.crypto.pad import generate_pad, invert_gate

__all__ = [
    "CipherSession",
    "analyze",
    "build_graph",
    "decrypt_record",
    "encrypt_record",
    "generate_pad",
    "invert_gate",
    "run_bench",
]
