"""Construction and persistence of the pruned, blocked, summarized
inverted index.

Per coordinate, the build pipeline is: gather the posting list, keep the
``max_postings`` highest-impact documents, partition them into blocks
(geometric clustering or fixed-size chunks), take the coordinate-wise maximum
of each block as its summary, prune the summary (mass-fraction or fixed
top-s), and optionally scalar-quantize the surviving values to one byte each.
Coordinates are independent work units, so builds may fan out across threads;
results are assembled in coordinate order and are byte-deterministic for a
given (collection, parameters, seed) triple.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import (
    COORD_DTYPE,
    VALUE_DTYPE,
    Collection,
    SparseVector,
    alpha_mass_subvector,
    top_s_subvector,
)
from .errors import BadMagicError, BadVersionError, TruncatedFileError, ValidationError
from .forward import ForwardIndex, build_forward, segment_gather_indices

INDEX_MAGIC = b"SIX1"
INDEX_VERSION = 1

BLOCKINGS = ("geometric", "fixed")
SUMMARIZATIONS = ("alpha_mass", "fixed_top")
QUANTIZATIONS = ("u8", "none")


@dataclass(frozen=True)
class BuildParams:
    """Index construction knobs.

    max_postings: per-coordinate posting-list cap (static pruning).
    max_blocks: cluster count target for geometric blocking.
    mass_fraction: fraction of each summary's L1 mass retained.
    blocking: "geometric" (inner-product clustering) or "fixed" (chunks of
        ``block_size`` in impact order).
    summarization: "alpha_mass" or "fixed_top" (keep ``summary_top`` entries).
    quantization: "u8" for one-byte codes, "none" for raw f32 summaries.
    """

    max_postings: int
    max_blocks: int
    mass_fraction: float
    blocking: str = "geometric"
    block_size: int | None = None
    summarization: str = "alpha_mass"
    summary_top: int | None = None
    quantization: str = "u8"
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_postings < 1:
            raise ValidationError("max_postings must be >= 1")
        if self.max_blocks < 1:
            raise ValidationError("max_blocks must be >= 1")
        if not 0.0 < self.mass_fraction <= 1.0:
            raise ValidationError("mass_fraction must lie in (0, 1]")
        if self.blocking not in BLOCKINGS:
            raise ValidationError(f"blocking must be one of {BLOCKINGS}")
        if self.blocking == "fixed" and (self.block_size is None or self.block_size < 1):
            raise ValidationError("fixed blocking requires block_size >= 1")
        if self.summarization not in SUMMARIZATIONS:
            raise ValidationError(f"summarization must be one of {SUMMARIZATIONS}")
        if self.summarization == "fixed_top" and (self.summary_top is None or self.summary_top < 1):
            raise ValidationError("fixed_top summarization requires summary_top >= 1")
        if self.quantization not in QUANTIZATIONS:
            raise ValidationError(f"quantization must be one of {QUANTIZATIONS}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValidationError("rng_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class QuantizedSummary:
    """One-byte-per-entry summary: value ~= minimum + code * step."""

    coords: np.ndarray  # u32, sorted
    codes: np.ndarray   # u8
    minimum: float
    step: float

    def reconstruct(self) -> SparseVector:
        values = self.minimum + self.codes.astype(np.float64) * self.step
        return SparseVector(self.coords, values.astype(VALUE_DTYPE), _checked=True)


@dataclass(frozen=True)
class Block:
    """An atomic unit of one inverted list: member ids plus their summary."""

    doc_ids: np.ndarray
    summary: SparseVector | QuantizedSummary


class PostingList:
    """Structure-of-arrays storage for the blocks of one coordinate."""

    __slots__ = (
        "doc_ids", "block_offsets", "summary_coords", "summary_offsets",
        "summary_values", "summary_codes", "summary_mins", "summary_steps",
        "_summary_f64",
    )

    def __init__(self, doc_ids, block_offsets, summary_coords, summary_offsets,
                 summary_values=None, summary_codes=None, summary_mins=None,
                 summary_steps=None):
        self.doc_ids = doc_ids
        self.block_offsets = block_offsets
        self.summary_coords = summary_coords
        self.summary_offsets = summary_offsets
        self.summary_values = summary_values
        self.summary_codes = summary_codes
        self.summary_mins = summary_mins
        self.summary_steps = summary_steps
        self._summary_f64 = None

    @property
    def n_blocks(self) -> int:
        return int(self.block_offsets.size - 1)

    @property
    def quantized(self) -> bool:
        return self.summary_codes is not None

    def summary_f64(self) -> np.ndarray:
        """Concatenated summary values as float64, dequantized on first use."""
        if self._summary_f64 is None:
            if self.quantized:
                widths = np.diff(self.summary_offsets)
                mins = np.repeat(self.summary_mins.astype(np.float64), widths)
                steps = np.repeat(self.summary_steps.astype(np.float64), widths)
                self._summary_f64 = mins + self.summary_codes.astype(np.float64) * steps
            else:
                self._summary_f64 = self.summary_values.astype(np.float64)
        return self._summary_f64

    def block(self, j: int) -> Block:
        lo, hi = self.block_offsets[j], self.block_offsets[j + 1]
        slo, shi = self.summary_offsets[j], self.summary_offsets[j + 1]
        coords = self.summary_coords[slo:shi]
        if self.quantized:
            summary = QuantizedSummary(coords, self.summary_codes[slo:shi],
                                       float(self.summary_mins[j]), float(self.summary_steps[j]))
        else:
            summary = SparseVector(coords, self.summary_values[slo:shi], _checked=True)
        return Block(self.doc_ids[lo:hi], summary)


class InvertedIndex:
    """The combined engine structure: blocked inverted lists plus the
    forward index used for exact block evaluation."""

    def __init__(self, dim: int, doc_count: int, params: BuildParams,
                 lists: list[PostingList | None], forward: ForwardIndex):
        self.dim = int(dim)
        self.doc_count = int(doc_count)
        self.params = params
        self.lists = lists
        self.forward = forward

    def blocks(self, coordinate: int) -> list[Block]:
        pl = self.lists[coordinate]
        if pl is None:
            return []
        return [pl.block(j) for j in range(pl.n_blocks)]

    def posting_ids(self, coordinate: int) -> np.ndarray:
        """Union of block members for one coordinate (the pruned posting set)."""
        pl = self.lists[coordinate]
        if pl is None:
            return np.empty(0, dtype=COORD_DTYPE)
        return np.sort(self.lists[coordinate].doc_ids)


def build_postings(c: Collection, coordinate: int, max_postings: int) -> np.ndarray:
    """Documents with a nonzero value at ``coordinate``, ordered by that value
    descending (ties: ascending id), truncated to ``max_postings``."""
    if not 0 <= coordinate < c.dim:
        raise ValidationError(f"coordinate {coordinate} out of range")
    csc = c.to_csc()
    lo, hi = csc.indptr[coordinate], csc.indptr[coordinate + 1]
    ids = csc.indices[lo:hi]          # ascending doc id
    vals = csc.data[lo:hi]
    order = np.argsort(-vals.astype(np.float64), kind="stable")
    return ids[order][:max_postings].astype(COORD_DTYPE)


def geometric_blocking(postings: np.ndarray, c: Collection, max_blocks: int,
                       rng_seed) -> list[np.ndarray]:
    """Partition a posting list into at most ``max_blocks`` geometric clusters.

    Representatives are sampled uniformly without replacement, then every
    posting document goes to the representative maximizing its inner product
    (ties to the lowest representative index). Empty clusters are dropped.
    """
    postings = np.asarray(postings, dtype=COORD_DTYPE)
    n = postings.size
    if n == 0:
        raise ValidationError("cannot block an empty posting list")
    m = min(max_blocks, n)
    if m == 1:
        return [postings]
    rng = np.random.default_rng(rng_seed)
    rep_pos = rng.choice(n, size=m, replace=False)
    csr = c.to_csr()
    members = csr[postings.astype(np.int64)]
    scores = (members @ csr[postings[rep_pos].astype(np.int64)].T).toarray()
    assign = np.argmax(scores, axis=1)
    order = np.argsort(assign, kind="stable")  # groups clusters, keeps impact order inside
    counts = np.bincount(assign, minlength=m)
    pieces = np.split(postings[order], np.cumsum(counts)[:-1])
    return [p for p in pieces if p.size]


def fixed_blocking(postings: np.ndarray, block_size: int) -> list[np.ndarray]:
    """Chunk the impact-sorted posting list into consecutive fixed-size groups."""
    postings = np.asarray(postings, dtype=COORD_DTYPE)
    if postings.size == 0:
        raise ValidationError("cannot block an empty posting list")
    if block_size < 1:
        raise ValidationError("block_size must be >= 1")
    return [postings[i : i + block_size] for i in range(0, postings.size, block_size)]


def _max_by_coordinate(coords: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate-wise maximum over concatenated entries."""
    order = np.argsort(coords, kind="stable")
    cs, vs = coords[order], values[order]
    uniq, starts = np.unique(cs, return_index=True)
    return uniq, np.maximum.reduceat(vs, starts)


def _summarize_ids(c: Collection, ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    starts = c.offsets[ids]
    lengths = c.offsets[ids + np.int64(1)] - starts
    keep = lengths > 0
    if not keep.any():
        raise ValidationError("cannot summarize a block of empty vectors")
    idx = segment_gather_indices(starts[keep], lengths[keep])
    return _max_by_coordinate(c.coords[idx], c.values[idx])


def summarize(block: Iterable[SparseVector]) -> SparseVector:
    """Coordinate-wise maximum of the block members.

    For nonnegative queries the result upper-bounds every member's inner
    product with the query.
    """
    vectors = list(block)
    if not vectors:
        raise ValidationError("cannot summarize an empty block")
    coords = np.concatenate([v.coords for v in vectors])
    values = np.concatenate([v.values for v in vectors])
    if coords.size == 0:
        raise ValidationError("cannot summarize a block of empty vectors")
    uniq, maxima = _max_by_coordinate(coords, values)
    return SparseVector(uniq, maxima, _checked=True)


def _quantize_values(values: np.ndarray) -> tuple[np.ndarray, np.float32, np.float32]:
    """One-byte codes over a 256-interval grid between min and max.

    The step is rounded upward into f32 so that 256 steps always cover the
    range; a final correction pass pins the reconstruction error at <= step.
    """
    v64 = values.astype(np.float64)
    m = np.float32(v64.min())
    step64 = (v64.max() - float(m)) / 256.0
    step = np.float32(step64)
    if float(step) < step64:
        step = np.nextafter(step, np.float32(np.inf))
    if step == 0:
        return np.zeros(values.size, dtype=np.uint8), m, np.float32(0.0)
    q = np.floor((v64 - float(m)) / float(step))
    codes = np.minimum(q, 255.0).astype(np.uint8)
    # floating division can land one grid cell low; bump those back
    low = (v64 - (float(m) + codes * float(step))) > float(step)
    codes[low] += 1
    return codes, m, step


def quantize_summary(s: SparseVector) -> QuantizedSummary:
    """Scalar-quantize a summary to one byte per retained value."""
    if s.nnz == 0:
        raise ValidationError("cannot quantize an empty summary")
    codes, m, step = _quantize_values(s.values)
    return QuantizedSummary(s.coords, codes, float(m), float(step))


def _build_one_list(c: Collection, coordinate: int, p: BuildParams) -> PostingList | None:
    postings = build_postings(c, coordinate, p.max_postings)
    if postings.size == 0:
        return None
    if p.blocking == "geometric":
        groups = geometric_blocking(postings, c, p.max_blocks, [p.rng_seed, coordinate])
    else:
        groups = fixed_blocking(postings, p.block_size)

    doc_chunks: list[np.ndarray] = []
    coord_chunks: list[np.ndarray] = []
    value_chunks: list[np.ndarray] = []
    code_chunks: list[np.ndarray] = []
    mins: list[np.float32] = []
    steps: list[np.float32] = []
    block_offsets = np.zeros(len(groups) + 1, dtype=np.int64)
    summary_offsets = np.zeros(len(groups) + 1, dtype=np.int64)
    for j, ids in enumerate(groups):
        coords, values = _summarize_ids(c, ids)
        full = SparseVector(coords, values, _checked=True)
        if p.summarization == "alpha_mass":
            pruned = alpha_mass_subvector(full, p.mass_fraction)
        else:
            pruned = top_s_subvector(full, p.summary_top)
        doc_chunks.append(ids)
        coord_chunks.append(pruned.coords)
        block_offsets[j + 1] = block_offsets[j] + ids.size
        summary_offsets[j + 1] = summary_offsets[j] + pruned.nnz
        if p.quantization == "u8":
            codes, m, step = _quantize_values(pruned.values)
            code_chunks.append(codes)
            mins.append(m)
            steps.append(step)
        else:
            value_chunks.append(pruned.values)

    quantized = p.quantization == "u8"
    return PostingList(
        doc_ids=np.concatenate(doc_chunks),
        block_offsets=block_offsets,
        summary_coords=np.concatenate(coord_chunks),
        summary_offsets=summary_offsets,
        summary_values=None if quantized else np.concatenate(value_chunks),
        summary_codes=np.concatenate(code_chunks) if quantized else None,
        summary_mins=np.array(mins, dtype=np.float32) if quantized else None,
        summary_steps=np.array(steps, dtype=np.float32) if quantized else None,
    )


def build_index(c: Collection, p: BuildParams, *, precision: str = "full",
                threads: int = 1) -> InvertedIndex:
    """Run the full per-coordinate pipeline and attach a forward index.

    Deterministic for fixed (collection, params, seed) regardless of
    ``threads``; coordinate work units are independent.
    """
    c.to_csr()
    c.to_csc()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            lists = list(pool.map(lambda i: _build_one_list(c, i, p), range(c.dim)))
    else:
        lists = [_build_one_list(c, i, p) for i in range(c.dim)]
    forward = build_forward(c, precision)
    return InvertedIndex(c.dim, len(c), p, lists, forward)


# ---------------------------------------------------------------------------
# IndexFile (version 1, little-endian). Layout documented in README.md.

_PARAMS_DTYPE = np.dtype([
    ("max_postings", "<u8"),
    ("max_blocks", "<u4"),
    ("mass_fraction", "<f8"),
    ("blocking", "u1"),
    ("block_size", "<u4"),
    ("summarization", "u1"),
    ("summary_top", "<u4"),
    ("quantization", "u1"),
    ("rng_seed", "<u8"),
    ("precision", "u1"),
])

_HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("version", "<u4"),
    ("dim", "<u4"),
    ("count", "<u8"),
])


def write_index(index: InvertedIndex, destination: str | Path) -> int:
    """Serialize an index; returns bytes written."""
    p = index.params
    header = np.zeros(1, dtype=_HEADER_DTYPE)
    header["magic"] = INDEX_MAGIC
    header["version"] = INDEX_VERSION
    header["dim"] = index.dim
    header["count"] = index.doc_count

    params = np.zeros(1, dtype=_PARAMS_DTYPE)
    params["max_postings"] = p.max_postings
    params["max_blocks"] = p.max_blocks
    params["mass_fraction"] = p.mass_fraction
    params["blocking"] = BLOCKINGS.index(p.blocking)
    params["block_size"] = p.block_size or 0
    params["summarization"] = SUMMARIZATIONS.index(p.summarization)
    params["summary_top"] = p.summary_top or 0
    params["quantization"] = QUANTIZATIONS.index(p.quantization)
    params["rng_seed"] = p.rng_seed
    params["precision"] = 0 if index.forward.precision == "full" else 1

    fwd = index.forward
    chunks = [
        header.tobytes(),
        params.tobytes(),
        np.array([fwd.coords.size], dtype="<u8").tobytes(),
        fwd.offsets.astype("<i8", copy=False).tobytes(),
        fwd.coords.astype("<u4", copy=False).tobytes(),
        fwd.values.astype("<f4" if fwd.precision == "full" else "<f2", copy=False).tobytes(),
    ]
    empty_list = np.array([0], dtype="<u4").tobytes()
    for pl in index.lists:
        if pl is None:
            chunks.append(empty_list)
            continue
        chunks.append(np.array([pl.n_blocks], dtype="<u4").tobytes())
        chunks.append(np.diff(pl.block_offsets).astype("<u4").tobytes())
        chunks.append(pl.doc_ids.astype("<u4", copy=False).tobytes())
        chunks.append(np.diff(pl.summary_offsets).astype("<u4").tobytes())
        chunks.append(pl.summary_coords.astype("<u4", copy=False).tobytes())
        if pl.quantized:
            chunks.append(pl.summary_codes.tobytes())
            chunks.append(pl.summary_mins.astype("<f4", copy=False).tobytes())
            chunks.append(pl.summary_steps.astype("<f4", copy=False).tobytes())
        else:
            chunks.append(pl.summary_values.astype("<f4", copy=False).tobytes())
    payload = b"".join(chunks)
    Path(destination).write_bytes(payload)
    return len(payload)


class _Cursor:
    def __init__(self, raw: bytes, source):
        self.raw = raw
        self.pos = 0
        self.source = source

    def take(self, dtype, count: int) -> np.ndarray:
        dtype = np.dtype(dtype)
        need = dtype.itemsize * count
        if self.pos + need > len(self.raw):
            raise TruncatedFileError(f"{self.source}: payload past end of file")
        out = np.frombuffer(self.raw, dtype=dtype, count=count, offset=self.pos)
        self.pos += need
        return out


def read_index(source: str | Path) -> InvertedIndex:
    """Read an IndexFile back into memory, validating magic and version."""
    raw = Path(source).read_bytes()
    cur = _Cursor(raw, source)
    header = cur.take(_HEADER_DTYPE, 1)[0]
    if bytes(header["magic"]) != INDEX_MAGIC:
        raise BadMagicError(f"{source}: bad magic {bytes(header['magic'])!r}")
    if int(header["version"]) != INDEX_VERSION:
        raise BadVersionError(f"{source}: unsupported version {int(header['version'])}")
    dim, count = int(header["dim"]), int(header["count"])

    pr = cur.take(_PARAMS_DTYPE, 1)[0]
    params = BuildParams(
        max_postings=int(pr["max_postings"]),
        max_blocks=int(pr["max_blocks"]),
        mass_fraction=float(pr["mass_fraction"]),
        blocking=BLOCKINGS[int(pr["blocking"])],
        block_size=int(pr["block_size"]) or None,
        summarization=SUMMARIZATIONS[int(pr["summarization"])],
        summary_top=int(pr["summary_top"]) or None,
        quantization=QUANTIZATIONS[int(pr["quantization"])],
        rng_seed=int(pr["rng_seed"]),
    )
    precision = "full" if int(pr["precision"]) == 0 else "half"

    n_entries = int(cur.take("<u8", 1)[0])
    offsets = cur.take("<i8", count + 1).astype(np.int64)
    coords = cur.take("<u4", n_entries).astype(COORD_DTYPE)
    vdtype = "<f4" if precision == "full" else "<f2"
    values = cur.take(vdtype, n_entries).astype(np.float32 if precision == "full" else np.float16)
    forward = ForwardIndex(dim, offsets, coords, values, precision)

    quantized = params.quantization == "u8"
    lists: list[PostingList | None] = []
    for _ in range(dim):
        n_blocks = int(cur.take("<u4", 1)[0])
        if n_blocks == 0:
            lists.append(None)
            continue
        doc_counts = cur.take("<u4", n_blocks).astype(np.int64)
        block_offsets = np.zeros(n_blocks + 1, dtype=np.int64)
        np.cumsum(doc_counts, out=block_offsets[1:])
        doc_ids = cur.take("<u4", int(block_offsets[-1])).astype(COORD_DTYPE)
        sum_counts = cur.take("<u4", n_blocks).astype(np.int64)
        summary_offsets = np.zeros(n_blocks + 1, dtype=np.int64)
        np.cumsum(sum_counts, out=summary_offsets[1:])
        sum_coords = cur.take("<u4", int(summary_offsets[-1])).astype(COORD_DTYPE)
        if quantized:
            codes = cur.take("u1", int(summary_offsets[-1])).copy()
            mins = cur.take("<f4", n_blocks).astype(np.float32)
            steps = cur.take("<f4", n_blocks).astype(np.float32)
            lists.append(PostingList(doc_ids, block_offsets, sum_coords, summary_offsets,
                                     summary_codes=codes, summary_mins=mins, summary_steps=steps))
        else:
            sum_values = cur.take("<f4", int(summary_offsets[-1])).astype(VALUE_DTYPE)
            lists.append(PostingList(doc_ids, block_offsets, sum_coords, summary_offsets,
                                     summary_values=sum_values))
    if cur.pos != len(raw):
        raise TruncatedFileError(f"{source}: {len(raw) - cur.pos} trailing bytes")
    return InvertedIndex(dim, count, params, lists, forward)
