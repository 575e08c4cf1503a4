"""Mass-concentration measurements.

Two read-only diagnostics over a collection: how much L1 mass the largest
entries of each vector carry, and how much of the query-document inner
product survives truncating both sides to their largest entries. Both are
the empirical basis for static pruning and summary pruning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Collection, SparseVector, inner_product, top_s_subvector
from .errors import ValidationError
from .search import exact_search


def l1_concentration(c: Collection, top_counts: list[int]) -> dict[int, float]:
    """Mean fraction of per-vector L1 mass kept by the top-n entries.

    Vectors are sorted by decreasing |value|; for each requested n the
    prefix-mass fraction is averaged over the collection (empty vectors are
    skipped). Fractions are in [0, 1] and non-decreasing in n.
    """
    if len(c) == 0:
        raise ValidationError("empty collection")
    if not top_counts or any(t < 1 for t in top_counts):
        raise ValidationError("top_counts must be positive integers")
    counts = sorted(set(int(t) for t in top_counts))
    sums = np.zeros(len(counts), dtype=np.float64)
    used = 0
    for v in c:
        if v.nnz == 0:
            continue
        mags = np.sort(np.abs(v.values.astype(np.float64)))[::-1]
        csum = np.cumsum(mags)
        total = csum[-1]
        used += 1
        for slot, t in enumerate(counts):
            sums[slot] += csum[min(t, v.nnz) - 1] / total
    if used == 0:
        raise ValidationError("collection has no non-empty vectors")
    return {t: float(s / used) for t, s in zip(counts, sums)}


@dataclass(frozen=True)
class IpPreservation:
    """Pooled mean fraction of inner product preserved, with a normal-
    approximation 95% confidence interval."""

    mean: float
    ci_low: float
    ci_high: float
    pairs_used: int
    pairs_excluded: int


def ip_preservation(c: Collection, queries: Collection, k: int,
                    q_keep: int, d_keep: int) -> IpPreservation:
    """Fraction of ⟨q, x⟩ preserved when q keeps its ``q_keep`` and x its
    ``d_keep`` largest entries, pooled over each query's exact top-k documents.

    Pairs with a zero full inner product are excluded (the ratio is
    undefined); the exclusion count is reported.
    """
    if k < 1 or q_keep < 1 or d_keep < 1:
        raise ValidationError("k, q_keep and d_keep must be >= 1")
    ratios: list[float] = []
    excluded = 0
    for q in queries:
        if q.nnz == 0:
            continue
        q_trim = top_s_subvector(q, q_keep)
        for _, doc_id in exact_search(c, q, k).pairs:
            doc = c.vector(doc_id)
            full = inner_product(q, doc)
            if full <= 0.0:
                excluded += 1
                continue
            trimmed = inner_product(q_trim, top_s_subvector(doc, d_keep))
            ratios.append(trimmed / full)
    if not ratios:
        raise ValidationError("no query-document pairs with positive inner product")
    arr = np.asarray(ratios, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size > 1:
        half = 1.96 * float(arr.std(ddof=1)) / float(np.sqrt(arr.size))
    else:
        half = 0.0
    return IpPreservation(mean, mean - half, mean + half, int(arr.size), excluded)
