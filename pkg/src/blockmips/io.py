"""Bit-exact persistence: collection files, ground-truth/result files, and
JSONL ingestion.

CollectionFile layout (version 1, little-endian):

    magic   4 bytes  b"SVC1"
    version u32      1
    dim     u32
    count   u64
    then per vector: nnz u32, nnz*u32 strictly-increasing coordinates,
    nnz*f32 finite nonzero values.

Ground-truth and result files share one tab-separated text format, one row
per (query, rank): ``query_id<TAB>rank<TAB>doc_id<TAB>score`` with ranks
1..k consecutive per query and scores non-increasing.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .core import COORD_DTYPE, VALUE_DTYPE, Collection
from .errors import (
    BadMagicError,
    BadVersionError,
    GroundTruthFormatError,
    IngestError,
    TruncatedFileError,
)

log = logging.getLogger(__name__)

COLLECTION_MAGIC = b"SVC1"
COLLECTION_VERSION = 1
_HEADER = np.dtype([("magic", "S4"), ("version", "<u4"), ("dim", "<u4"), ("count", "<u8")])


def write_collection(c: Collection, destination: str | Path) -> int:
    """Serialize a collection; returns the number of bytes written."""
    n = len(c)
    header = np.zeros(1, dtype=_HEADER)
    header["magic"] = COLLECTION_MAGIC
    header["version"] = COLLECTION_VERSION
    header["dim"] = c.dim
    header["count"] = n
    nnz = np.diff(c.offsets).astype("<u4")
    chunks = [header.tobytes()]
    coords = c.coords.astype("<u4", copy=False)
    values = c.values.astype("<f4", copy=False)
    for i in range(n):
        lo, hi = c.offsets[i], c.offsets[i + 1]
        chunks.append(nnz[i : i + 1].tobytes())
        chunks.append(coords[lo:hi].tobytes())
        chunks.append(values[lo:hi].tobytes())
    payload = b"".join(chunks)
    Path(destination).write_bytes(payload)
    return len(payload)


def read_collection(source: str | Path, *, role: str = "documents") -> Collection:
    """Read and validate a collection.

    ``role`` selects the value-sign policy: ``documents`` must be strictly
    positive, ``queries`` merely get a warning for negative values.
    """
    if role not in ("documents", "queries"):
        raise ValueError("role must be 'documents' or 'queries'")
    raw = Path(source).read_bytes()
    if len(raw) < _HEADER.itemsize:
        raise TruncatedFileError(f"{source}: shorter than the fixed header")
    header = np.frombuffer(raw, dtype=_HEADER, count=1)[0]
    if bytes(header["magic"]) != COLLECTION_MAGIC:
        raise BadMagicError(f"{source}: bad magic {bytes(header['magic'])!r}")
    if int(header["version"]) != COLLECTION_VERSION:
        raise BadVersionError(f"{source}: unsupported version {int(header['version'])}")
    dim, count = int(header["dim"]), int(header["count"])

    pos = _HEADER.itemsize
    offsets = np.zeros(count + 1, dtype=np.int64)
    coord_parts: list[np.ndarray] = []
    value_parts: list[np.ndarray] = []
    for i in range(count):
        if pos + 4 > len(raw):
            raise TruncatedFileError(f"{source}: vector {i} header past end of file")
        nnz = int(np.frombuffer(raw, dtype="<u4", count=1, offset=pos)[0])
        pos += 4
        need = nnz * 8
        if pos + need > len(raw):
            raise TruncatedFileError(f"{source}: vector {i} payload past end of file")
        coord_parts.append(np.frombuffer(raw, dtype="<u4", count=nnz, offset=pos))
        pos += nnz * 4
        value_parts.append(np.frombuffer(raw, dtype="<f4", count=nnz, offset=pos))
        pos += nnz * 4
        offsets[i + 1] = offsets[i] + nnz
    if pos != len(raw):
        raise TruncatedFileError(f"{source}: {len(raw) - pos} trailing bytes")

    coords = np.concatenate(coord_parts) if coord_parts else np.empty(0, dtype=COORD_DTYPE)
    values = np.concatenate(value_parts) if value_parts else np.empty(0, dtype=VALUE_DTYPE)
    c = Collection(dim, offsets, coords.astype(COORD_DTYPE), values.astype(VALUE_DTYPE),
                   nonnegative=(role == "documents"))
    if role == "queries" and values.size and values.min() < 0:
        log.warning("%s: query collection carries negative values", source)
    return c


def ingest_jsonl(source: str | Path, dim: int, *, role: str = "documents") -> Collection:
    """Build a collection from one JSON object per line mapping
    coordinate-as-string to numeric value.

    Zero values are dropped (a vector losing all entries is kept empty, with
    a warning); entries are re-sorted by coordinate; ids follow line order.
    """
    offsets = [0]
    coords: list[np.ndarray] = []
    values: list[np.ndarray] = []
    total = 0
    with open(source, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(line_no, f"malformed JSON ({e.msg})") from e
            if not isinstance(obj, dict):
                raise IngestError(line_no, "expected a JSON object")
            try:
                pairs = sorted((int(k), float(v)) for k, v in obj.items())
            except (TypeError, ValueError) as e:
                raise IngestError(line_no, f"non-numeric entry ({e})") from e
            pairs = [(c, v) for c, v in pairs if v != 0.0]
            for c, v in pairs:
                if not 0 <= c < dim:
                    raise IngestError(line_no, f"coordinate {c} outside [0, {dim})")
                if not np.isfinite(v):
                    raise IngestError(line_no, f"non-finite value at coordinate {c}")
                if role == "documents" and v < 0:
                    raise IngestError(line_no, f"negative value at coordinate {c}")
            if len({c for c, _ in pairs}) != len(pairs):
                raise IngestError(line_no, "duplicate coordinates")
            if not pairs:
                log.warning("%s line %d: vector is empty after dropping zeros", source, line_no)
            coords.append(np.array([c for c, _ in pairs], dtype=COORD_DTYPE))
            values.append(np.array([v for _, v in pairs], dtype=VALUE_DTYPE))
            total += len(pairs)
            offsets.append(total)
    return Collection(
        dim,
        np.array(offsets, dtype=np.int64),
        np.concatenate(coords) if coords else np.empty(0, dtype=COORD_DTYPE),
        np.concatenate(values) if values else np.empty(0, dtype=VALUE_DTYPE),
        nonnegative=(role == "documents"),
    )


def write_ranked(results: dict[int, list[tuple[int, float]]], destination: str | Path) -> None:
    """Write ranked (doc_id, score) lists in the shared tab-separated format."""
    with open(destination, "w", encoding="utf-8") as fh:
        for qid in sorted(results):
            for rank, (doc_id, score) in enumerate(results[qid], start=1):
                fh.write(f"{qid}\t{rank}\t{doc_id}\t{score!r}\n")


def read_ranked(source: str | Path) -> dict[int, list[tuple[int, float]]]:
    """Read and validate a ranked-results file; ranks must be consecutive from
    1 within a query and scores non-increasing."""
    out: dict[int, list[tuple[int, float]]] = {}
    with open(source, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise GroundTruthFormatError(line_no, f"expected 4 fields, got {len(parts)}")
            try:
                qid, rank, doc_id, score = int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])
            except ValueError as e:
                raise GroundTruthFormatError(line_no, f"unparseable field ({e})") from e
            rows = out.setdefault(qid, [])
            if rank != len(rows) + 1:
                raise GroundTruthFormatError(line_no, f"rank {rank} not consecutive for query {qid}")
            if rows and score > rows[-1][1]:
                raise GroundTruthFormatError(line_no, f"score increases at rank {rank} of query {qid}")
            rows.append((doc_id, score))
    return out
