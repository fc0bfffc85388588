"""LangGraph assembly for the benchmark: a router node dispatches each pipeline."""

from __future__ import annotations

import time
from typing import Callable, Sequence

from langgraph.graph import END, StateGraph

from src.qppnest.bench.pipelines import PIPELINES, BenchContext
from src.qppnest.bench.report import OPENSSL_AES, BenchReport
from src.qppnest.bench.state import BenchState
from src.qppnest.errors import ParameterError
from src.qppnest.progress import log_bench_row, log_route, log_stage_done, log_stage_start

FINISH = "FINISH"
DEFAULT_PIPELINES = tuple(PIPELINES)

_REASONS = {
    "qpp_encrypt": "QPP-only throughput, the inner layer on its own.",
    "qpp_decrypt": "QPP decryption uses the inverse gates; should track encryption.",
    "aes256_ctr": "Software table AES-256-CTR baseline for the QPP comparison.",
    "nested_qpp_aes": "QPP output re-encrypted by AES: the nested pipeline.",
    "handshake": "In-memory mock-KEM handshakes including key confirmation.",
    OPENSSL_AES: "Platform AES-CTR for reference; excluded from every ratio.",
}


def router(state: BenchState) -> dict:
    """Pick the next pending pipeline, or finish when none remain."""
    pending = state.get("pending", [])
    step = state.get("step", 0)
    if not pending:
        return {"current": FINISH}
    next_pipeline = pending[0]
    log_route(step + 1, state.get("total", len(pending)), next_pipeline, _REASONS.get(next_pipeline, ""))
    return {"current": next_pipeline, "pending": pending[1:], "step": step + 1}


def route_after_router(state: BenchState) -> str:
    current = state.get("current", FINISH)
    return current if current in PIPELINES else FINISH


def _pipeline_node(name: str, ctx: BenchContext) -> Callable[[BenchState], dict]:
    measure = PIPELINES[name]

    def node(state: BenchState) -> dict:
        t0 = time.time()
        log_stage_start(name)
        row = measure(ctx)
        log_bench_row(row.name, row.bytes, row.seconds, row.mb_per_s)
        log_stage_done(name, time.time() - t0, f"best of {ctx.repeat}")
        return {"rows": [row]}

    return node


def build_graph(ctx: BenchContext, pipelines: Sequence[str] = DEFAULT_PIPELINES):
    """Construct and compile the benchmark graph for ``pipelines``."""
    unknown = [p for p in pipelines if p not in PIPELINES]
    if unknown:
        raise ParameterError(f"unknown benchmark pipeline(s): {', '.join(unknown)}")

    graph = StateGraph(BenchState)
    graph.add_node("router", router)
    for name in pipelines:
        graph.add_node(name, _pipeline_node(name, ctx))

    graph.set_entry_point("router")
    graph.add_conditional_edges(
        "router",
        route_after_router,
        {**{name: name for name in pipelines}, FINISH: END},
    )
    for name in pipelines:
        graph.add_edge(name, "router")

    return graph.compile()


def run_bench(ctx: BenchContext, pipelines: Sequence[str] = DEFAULT_PIPELINES) -> BenchReport:
    pipelines = list(dict.fromkeys(pipelines))
    app = build_graph(ctx, pipelines)
    initial: BenchState = {
        "rows": [],
        "pending": pipelines,
        "current": "",
        "step": 0,
        "total": len(pipelines),
    }
    final = app.invoke(initial, config={"recursion_limit": 2 * len(pipelines) + 5})
    return BenchReport(rows=list(final["rows"]))
