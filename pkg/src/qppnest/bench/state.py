from __future__ import annotations

import operator
from typing import Annotated, TypedDict

from src.qppnest.bench.report import BenchRow


class BenchState(TypedDict):
    """Shared state that flows through every node of the benchmark graph."""

    rows: Annotated[list[BenchRow], operator.add]

    pending: list[str]
    current: str
    step: int
    total: int
