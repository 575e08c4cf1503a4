"""Forward index: exact document-vector lookup backing block evaluation.

Entries live in flat contiguous arrays addressed by an offsets table, so
scoring a batch of scattered documents is a pair of gathers plus a segmented
reduction rather than N small object walks. Values are stored at full (f32)
or half (f16) precision; scoring always accumulates in float64 through a
cached wide copy of the values.
"""

from __future__ import annotations

import numpy as np

from .core import COORD_DTYPE, Collection, SparseVector, inner_product
from .errors import ValidationError

PRECISIONS = ("full", "half")


def segment_gather_indices(starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Flat indices covering [starts[i], starts[i]+lengths[i]) for each i.

    Empty segments must be filtered out by the caller.
    """
    boundaries = np.cumsum(lengths)
    idx = np.ones(int(boundaries[-1]), dtype=np.int64)
    idx[0] = starts[0]
    idx[boundaries[:-1]] = starts[1:] - (starts[:-1] + lengths[:-1] - 1)
    np.cumsum(idx, out=idx)
    return idx


def segment_scores(
    offsets: np.ndarray,
    coords: np.ndarray,
    values_f64: np.ndarray,
    dense_q: np.ndarray,
    ids: np.ndarray,
) -> np.ndarray:
    """Inner products of ``dense_q`` with the vectors named by ``ids``.

    One gather over the entry store plus one segmented sum; every document's
    entries are reduced in storage (ascending-coordinate) order, so the result
    for a given document does not depend on which batch it was scored in.
    """
    starts = offsets[ids]
    lengths = offsets[ids + 1] - starts
    scores = np.zeros(len(ids), dtype=np.float64)
    nonempty = lengths > 0
    if not nonempty.any():
        return scores
    st, ln = starts[nonempty], lengths[nonempty]
    idx = segment_gather_indices(st, ln)
    products = dense_q[coords[idx]] * values_f64[idx]
    seg_starts = np.zeros(len(st), dtype=np.int64)
    np.cumsum(ln[:-1], out=seg_starts[1:])
    scores[nonempty] = np.add.reduceat(products, seg_starts)
    return scores


class ForwardIndex:
    """Document id -> exact vector lookup table with flat entry storage."""

    __slots__ = ("dim", "precision", "offsets", "coords", "values", "_values_f64")

    def __init__(self, dim: int, offsets: np.ndarray, coords: np.ndarray,
                 values: np.ndarray, precision: str):
        if precision not in PRECISIONS:
            raise ValidationError(f"precision must be one of {PRECISIONS}")
        self.dim = int(dim)
        self.precision = precision
        self.offsets = offsets
        self.coords = coords
        self.values = values
        self._values_f64 = values.astype(np.float64)
        for a in (self.offsets, self.coords, self.values, self._values_f64):
            a.setflags(write=False)

    def __len__(self) -> int:
        return int(self.offsets.size - 1)

    def lookup(self, doc_id: int) -> SparseVector:
        """The stored vector, at canonical f32 precision."""
        if not 0 <= doc_id < len(self):
            raise ValidationError(f"document id {doc_id} out of range")
        lo, hi = self.offsets[doc_id], self.offsets[doc_id + 1]
        return SparseVector(self.coords[lo:hi], self.values[lo:hi].astype(np.float32),
                            _checked=True)

    def score(self, q: SparseVector, doc_id: int) -> float:
        """Inner product of ``q`` with the stored vector for ``doc_id``."""
        return inner_product(q, self.lookup(doc_id))

    def score_many(self, dense_q: np.ndarray, ids: np.ndarray) -> np.ndarray:
        """Batch scores against a densified float64 query."""
        return segment_scores(self.offsets, self.coords, self._values_f64, dense_q, ids)

    def size_bytes(self) -> int:
        """Serialized payload size: offsets table plus entry arrays."""
        return int(
            self.offsets.size * 8 + self.coords.size * 4
            + self.values.size * self.values.itemsize
        )


def build_forward(c: Collection, precision: str = "full") -> ForwardIndex:
    """Copy a collection into forward-index layout.

    Half precision stores values as f16 (exact for values like 1.0, otherwise
    within half-precision rounding); full precision reproduces the collection
    bit for bit.
    """
    if precision not in PRECISIONS:
        raise ValidationError(f"precision must be one of {PRECISIONS}")
    dtype = np.float32 if precision == "full" else np.float16
    return ForwardIndex(
        c.dim,
        c.offsets.copy(),
        c.coords.astype(COORD_DTYPE),
        c.values.astype(dtype),
        precision,
    )
