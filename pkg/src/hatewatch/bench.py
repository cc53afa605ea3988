"""Latency benchmark for a saved serving model against a corpus."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import read_corpus
from .hub import ServingModel
from .textnorm import LexiconSet, default_lexicons

__all__ = ["LatencyReport", "run_benchmark"]


@dataclass(frozen=True)
class LatencyReport:
    requests: int
    concurrency: int
    p50_ms: float
    p95_ms: float
    p99_ms: float
    throughput_rps: float
    total_seconds: float

    def __post_init__(self) -> None:
        if not self.p50_ms <= self.p95_ms <= self.p99_ms:
            raise ValueError("percentiles must be non-decreasing")

    def to_json(self) -> dict:
        return {
            "requests": self.requests,
            "concurrency": self.concurrency,
            "p50_ms": self.p50_ms,
            "p95_ms": self.p95_ms,
            "p99_ms": self.p99_ms,
            "throughput_rps": self.throughput_rps,
            "total_seconds": self.total_seconds,
        }


def run_benchmark(
    model_dir,
    corpus_path,
    requests: int,
    concurrency: int = 1,
    language: str = "en",
    lexicons: LexiconSet = None,
) -> LatencyReport:
    """Score a deterministic request set and report wall-clock percentiles."""
    if requests < 1:
        raise ValueError("requests must be >= 1")
    if concurrency < 1:
        raise ValueError("concurrency must be >= 1")
    lexicons = lexicons or default_lexicons()
    serving = ServingModel.load(model_dir, language, lexicons)
    texts = [r.text for r in read_corpus(corpus_path)]
    if not texts:
        raise ValueError(f"{corpus_path}: corpus has no records")

    def timed(i: int) -> float:
        start = time.perf_counter()
        serving.score(texts[i % len(texts)])
        return time.perf_counter() - start

    wall_start = time.perf_counter()
    if concurrency == 1:
        latencies = [timed(i) for i in range(requests)]
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            latencies = list(pool.map(timed, range(requests)))
    total = time.perf_counter() - wall_start

    p50, p95, p99 = np.percentile(np.array(latencies) * 1000.0, [50, 95, 99])
    return LatencyReport(
        requests=requests,
        concurrency=concurrency,
        p50_ms=float(p50),
        p95_ms=float(p95),
        p99_ms=float(p99),
        throughput_rps=requests / total if total > 0 else float("inf"),
        total_seconds=total,
    )
