"""Measurement harness: recall against exact search, single-threaded latency
sweeps over search-parameter grids, and exact byte accounting of a
serialized index.

Timing wraps nothing but the search call itself: queries are parsed and the
index is resident before the clock starts, and each configuration gets one
untimed warm-up pass over the query set.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import Collection
from .errors import ValidationError
from .index import InvertedIndex
from .search import SearchParams, SearchResult, search

CSV_COLUMNS = [
    "k", "cut", "heap_factor",
    "mean_us", "p50_us", "p95_us", "p99_us",
    "accuracy", "docs_scored_mean", "blocks_skipped_mean",
]


def accuracy(approx: Mapping[int, Sequence[int]], exact: Mapping[int, Sequence[int]],
             k: int) -> float:
    """Mean fraction of each query's exact top-k ids present in the
    approximate top-k. Order within a list is irrelevant."""
    if not exact:
        raise ValidationError("empty ground truth")
    missing = exact.keys() ^ approx.keys()
    if missing:
        raise ValidationError(f"query ids not present in both inputs: {sorted(missing)[:5]}")
    total = 0.0
    for qid, truth in exact.items():
        total += len(set(approx[qid][:k]) & set(truth[:k])) / k
    return total / len(exact)


@dataclass(frozen=True)
class SweepRow:
    params: SearchParams
    mean_us: float
    p50_us: float
    p95_us: float
    p99_us: float
    accuracy: float
    docs_scored_mean: float
    blocks_skipped_mean: float

    def as_record(self) -> dict[str, float]:
        return {
            "k": self.params.k,
            "cut": self.params.cut,
            "heap_factor": self.params.heap_factor,
            "mean_us": self.mean_us,
            "p50_us": self.p50_us,
            "p95_us": self.p95_us,
            "p99_us": self.p99_us,
            "accuracy": self.accuracy,
            "docs_scored_mean": self.docs_scored_mean,
            "blocks_skipped_mean": self.blocks_skipped_mean,
        }


def run_queries(index: InvertedIndex, queries: Collection,
                params: SearchParams) -> dict[int, SearchResult]:
    """Search every query once, untimed. Empty queries yield empty results."""
    out: dict[int, SearchResult] = {}
    for qid in range(len(queries)):
        q = queries.vector(qid)
        out[qid] = search(index, q, params) if q.nnz else SearchResult([])
    return out


def _sweep_one(index: InvertedIndex, queries: Collection, params: SearchParams,
               ground_truth: Mapping[int, Sequence[int]]) -> SweepRow:
    n = len(queries)
    run_queries(index, queries, params)  # warm-up pass, excluded from timing
    elapsed_us = np.zeros(n, dtype=np.float64)
    results: dict[int, SearchResult] = {}
    for qid in range(n):
        q = queries.vector(qid)
        if q.nnz == 0:
            results[qid] = SearchResult([])
            continue
        t0 = time.perf_counter_ns()
        r = search(index, q, params)
        elapsed_us[qid] = (time.perf_counter_ns() - t0) / 1e3
        results[qid] = r
    ids = {qid: r.doc_ids() for qid, r in results.items()}
    acc = accuracy(ids, ground_truth, params.k)
    return SweepRow(
        params=params,
        mean_us=float(elapsed_us.mean()),
        p50_us=float(np.percentile(elapsed_us, 50)),
        p95_us=float(np.percentile(elapsed_us, 95)),
        p99_us=float(np.percentile(elapsed_us, 99)),
        accuracy=acc,
        docs_scored_mean=float(np.mean([r.stats.documents_scored for r in results.values()])),
        blocks_skipped_mean=float(np.mean([r.stats.blocks_skipped for r in results.values()])),
    )


def latency_sweep(index: InvertedIndex, queries: Collection,
                  grid: Sequence[SearchParams],
                  ground_truth: Mapping[int, Sequence[int]],
                  parallel: int = 1) -> list[SweepRow]:
    """Evaluate each configuration over the full query set.

    Configurations run sequentially by default for timing integrity; with
    ``parallel`` > 1 they share the immutable index across worker threads
    (each configuration's queries still run one after another).
    """
    if len(queries) == 0:
        raise ValidationError("empty query collection")
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(lambda p: _sweep_one(index, queries, p, ground_truth), grid))
    return [_sweep_one(index, queries, p, ground_truth) for p in grid]


def write_sweep_csv(rows: Sequence[SweepRow], destination: str | Path) -> None:
    with open(destination, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.as_record())


@dataclass(frozen=True)
class IndexSizeReport:
    """Exact serialized byte counts, component by component.

    ``total_bytes`` is the IndexFile size: metadata + postings + summaries +
    forward. ``summary_value_bytes`` is the value payload inside
    ``summaries_bytes`` (1 byte per entry quantized, 4 raw).
    """

    metadata_bytes: int
    postings_bytes: int
    summaries_bytes: int
    summary_value_bytes: int
    forward_bytes: int
    total_bytes: int


def index_size_report(index: InvertedIndex) -> IndexSizeReport:
    # mirrors the IndexFile v1 layout exactly; see write_index
    metadata = 20 + 40 + 8  # header, params record, forward entry count
    postings = 0
    summaries = 0
    summary_values = 0
    for pl in index.lists:
        postings += 4  # block count
        if pl is None:
            continue
        postings += 4 * pl.n_blocks + 4 * pl.doc_ids.size
        entries = pl.summary_coords.size
        summaries += 4 * pl.n_blocks + 4 * entries
        if pl.quantized:
            summary_values += entries
            summaries += entries + 8 * pl.n_blocks  # codes + per-block min/step
        else:
            summary_values += 4 * entries
            summaries += 4 * entries
    fwd = index.forward.size_bytes()
    total = metadata + postings + summaries + fwd
    return IndexSizeReport(metadata, postings, summaries, summary_values, fwd, total)
