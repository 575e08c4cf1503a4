"""Top-k retrieval: coordinate-at-a-time approximate search over the blocked
index, and the exhaustive exact oracle it is measured against.

Query processing walks the inverted lists of the largest query entries.
Every block's summary is scored first; once the heap holds k results, a block
whose summary score falls below heap-min / heap_factor is skipped outright.
Surviving blocks are scored exactly through the forward index. A per-query
visited set keeps a document reached via several lists from being scored (or
inserted) twice.

Result ordering is score-descending with ties broken by ascending document
id, on both the approximate and exact paths, so agreement between the two is
plain set equality.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .core import Collection, SparseVector
from .errors import ValidationError
from .forward import segment_scores
from .index import InvertedIndex


@dataclass(frozen=True)
class SearchParams:
    """Query-time knobs: result count, number of query coordinates traversed,
    and the block-skip relaxation factor."""

    k: int
    cut: int
    heap_factor: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.cut < 1:
            raise ValidationError("cut must be >= 1")
        if not 0.0 < self.heap_factor <= 1.0:
            raise ValidationError("heap_factor must lie in (0, 1]")


@dataclass
class SearchStats:
    blocks_visited: int = 0
    blocks_skipped: int = 0
    documents_scored: int = 0


@dataclass
class SearchResult:
    """Score-descending (score, doc_id) pairs plus traversal counters."""

    pairs: list[tuple[float, int]]
    stats: SearchStats = field(default_factory=SearchStats)

    def doc_ids(self) -> list[int]:
        return [d for _, d in self.pairs]


def query_cut(q: SparseVector, cut: int) -> np.ndarray:
    """Coordinates of the ``cut`` largest-|value| query entries, largest
    first (ties by ascending coordinate)."""
    if q.nnz == 0:
        raise ValidationError("empty query")
    if cut < 1:
        raise ValidationError("cut must be >= 1")
    order = np.lexsort((q.coords, -np.abs(q.values.astype(np.float64))))
    return q.coords[order[: min(cut, q.nnz)]]


def _extract(heap: list[tuple[float, int]], stats: SearchStats) -> SearchResult:
    pairs = [(float(score), -neg) for score, neg in heap]
    pairs.sort(key=lambda t: (-t[0], t[1]))
    return SearchResult(pairs, stats)


def search(index: InvertedIndex, q: SparseVector, p: SearchParams) -> SearchResult:
    """Approximate top-k inner-product search (coordinate-at-a-time)."""
    if q.nnz and int(q.coords[-1]) >= index.dim:
        raise ValidationError("query dimensionality exceeds the index")
    stats = SearchStats()
    if index.doc_count == 0:
        return SearchResult([], stats)

    dense_q = np.zeros(index.dim, dtype=np.float64)
    dense_q[q.coords] = q.values
    visited = np.zeros(index.doc_count, dtype=bool)
    fwd = index.forward
    # heap of (score, -doc_id): the root is the worst kept result, where
    # "worse" is lower score, then larger doc id
    heap: list[tuple[float, int]] = []
    k = p.k

    for coordinate in query_cut(q, p.cut):
        pl = index.lists[coordinate]
        if pl is None:
            continue
        # summary scores for every block of this list in one pass
        summary_scores = np.add.reduceat(
            dense_q[pl.summary_coords] * pl.summary_f64(), pl.summary_offsets[:-1]
        )
        block_offsets = pl.block_offsets
        doc_ids = pl.doc_ids
        for j in range(pl.n_blocks):
            if len(heap) == k and summary_scores[j] < heap[0][0] / p.heap_factor:
                stats.blocks_skipped += 1
                continue
            stats.blocks_visited += 1
            ids = doc_ids[block_offsets[j] : block_offsets[j + 1]]
            fresh = ~visited[ids]
            if not fresh.any():
                continue
            ids = ids[fresh]
            visited[ids] = True
            stats.documents_scored += int(ids.size)
            scores = fwd.score_many(dense_q, ids)
            if len(heap) < k:
                take = min(k - len(heap), ids.size)
                for t in range(take):
                    heapq.heappush(heap, (scores[t], -int(ids[t])))
                start = take
            else:
                start = 0
            if start < ids.size:
                floor_score = heap[0][0]
                good = np.nonzero(scores[start:] >= floor_score)[0] + start
                for t in good:
                    key = (scores[t], -int(ids[t]))
                    if key > heap[0]:
                        heapq.heapreplace(heap, key)
    return _extract(heap, stats)


def exact_search(c: Collection, q: SparseVector, k: int) -> SearchResult:
    """Exhaustive top-k scan of the whole collection; the accuracy oracle.

    Shares its scoring kernel with block evaluation, so a search run under a
    lossless configuration reproduces these scores bit for bit.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if q.nnz and int(q.coords[-1]) >= c.dim:
        raise ValidationError("query dimensionality exceeds the collection")
    n = len(c)
    stats = SearchStats(documents_scored=n)
    if n == 0:
        return SearchResult([], stats)
    dense_q = np.zeros(c.dim, dtype=np.float64)
    dense_q[q.coords] = q.values
    ids = np.arange(n, dtype=np.int64)
    scores = segment_scores(c.offsets, c.coords, c.values_f64(), dense_q, ids)
    order = np.lexsort((ids, -scores))[: min(k, n)]
    pairs = [(float(scores[i]), int(i)) for i in order]
    return SearchResult(pairs, stats)
