"""Approximate maximum-inner-product search over sparse vectors.

The engine statically prunes each inverted list to its highest-impact
documents, partitions the survivors into geometrically cohesive blocks,
and equips every block with a pruned, optionally 8-bit-quantized summary
vector. Queries traverse a handful of lists, use summaries to skip blocks,
and score the remainder exactly through a forward index.
"""

from .core import Collection, Entry, SparseVector, alpha_mass_subvector, inner_product, l1_mass, top_s_subvector
from .forward import ForwardIndex, build_forward
from .index import (
    Block,
    BuildParams,
    InvertedIndex,
    QuantizedSummary,
    build_index,
    build_postings,
    fixed_blocking,
    geometric_blocking,
    quantize_summary,
    read_index,
    summarize,
    write_index,
)
from .search import SearchParams, SearchResult, SearchStats, exact_search, query_cut, search

__all__ = [
    "Block",
    "BuildParams",
    "Collection",
    "Entry",
    "ForwardIndex",
    "InvertedIndex",
    "QuantizedSummary",
    "SearchParams",
    "SearchResult",
    "SearchStats",
    "SparseVector",
    "alpha_mass_subvector",
    "build_forward",
    "build_index",
    "build_postings",
    "exact_search",
    "fixed_blocking",
    "geometric_blocking",
    "inner_product",
    "l1_mass",
    "quantize_summary",
    "query_cut",
    "read_index",
    "search",
    "summarize",
    "top_s_subvector",
    "write_index",
]
