"""Sparse-vector primitives: entries, vectors, collections, and the handful
of operations everything else is built from.

A vector is a sorted run of (coordinate, value) entries with float32 values;
a collection is a flat, offset-indexed store of such vectors sharing one
dimensionality. All types are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy import sparse as sp

from .errors import (
    CoordinateOutOfRangeError,
    InvalidValueError,
    NegativeValueError,
    UnsortedCoordinatesError,
    ValidationError,
)

COORD_DTYPE = np.uint32
VALUE_DTYPE = np.float32


class Entry(NamedTuple):
    """One (coordinate, value) pair of a sparse vector."""

    coordinate: int
    value: float


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class SparseVector:
    """A sparse vector held as parallel sorted-coordinate / value arrays.

    Coordinates are strictly increasing uint32, values are nonzero finite
    float32. Construction validates; use :meth:`from_entries` for convenience.
    """

    __slots__ = ("coords", "values")

    def __init__(self, coords, values, *, _checked: bool = False):
        coords = np.ascontiguousarray(coords, dtype=COORD_DTYPE)
        values = np.ascontiguousarray(values, dtype=VALUE_DTYPE)
        if not _checked:
            if coords.ndim != 1 or values.ndim != 1 or coords.shape != values.shape:
                raise ValidationError("coords and values must be 1-d arrays of equal length")
            if coords.size > 1 and not np.all(np.diff(coords.astype(np.int64)) > 0):
                raise UnsortedCoordinatesError(-1, "coordinates not strictly increasing")
            if values.size and (not np.all(np.isfinite(values)) or np.any(values == 0)):
                raise InvalidValueError(-1, "values must be finite and nonzero")
        self.coords = _freeze(coords)
        self.values = _freeze(values)

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[int, float]]) -> "SparseVector":
        """Build from (coordinate, value) pairs in any order; zeros rejected."""
        pairs = sorted((int(c), float(v)) for c, v in entries)
        coords = [c for c, _ in pairs]
        if len(set(coords)) != len(coords):
            raise UnsortedCoordinatesError(-1, "duplicate coordinates")
        return cls(coords, [v for _, v in pairs])

    @property
    def nnz(self) -> int:
        return int(self.coords.size)

    def entries(self) -> Iterator[Entry]:
        for c, v in zip(self.coords.tolist(), self.values.tolist()):
            yield Entry(c, v)

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim, dtype=np.float64)
        out[self.coords] = self.values
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and np.array_equal(self.coords, other.coords)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.coords.tobytes(), self.values.tobytes()))

    def __len__(self) -> int:
        return self.nnz

    def __repr__(self) -> str:
        inner = ", ".join(f"({c}, {v:g})" for c, v in zip(self.coords, self.values))
        return f"SparseVector[{inner}]"


class Collection:
    """An ordered set of sparse vectors sharing a dimensionality.

    Document ids are the positions 0..N-1. Storage is flat (offsets into
    concatenated coordinate/value arrays) so scans and serialization touch
    contiguous memory.
    """

    __slots__ = ("dim", "offsets", "coords", "values", "_csr", "_csc", "_values_f64")

    def __init__(self, dim: int, offsets, coords, values, *, nonnegative: bool = True,
                 _checked: bool = False):
        self.dim = int(dim)
        self.offsets = _freeze(np.ascontiguousarray(offsets, dtype=np.int64))
        self.coords = _freeze(np.ascontiguousarray(coords, dtype=COORD_DTYPE))
        self.values = _freeze(np.ascontiguousarray(values, dtype=VALUE_DTYPE))
        self._csr = None
        self._csc = None
        self._values_f64 = None
        if not _checked:
            self._validate(nonnegative)

    def _validate(self, nonnegative: bool) -> None:
        if self.dim < 0:
            raise ValidationError("dim must be nonnegative")
        if self.offsets.size == 0 or self.offsets[0] != 0:
            raise ValidationError("offsets must start at 0")
        if not np.all(np.diff(self.offsets) >= 0) or self.offsets[-1] != self.coords.size:
            raise ValidationError("offsets must be non-decreasing and end at the entry count")
        if self.coords.size != self.values.size:
            raise ValidationError("coords and values length mismatch")
        if self.coords.size and int(self.coords.max()) >= self.dim:
            doc = int(np.searchsorted(self.offsets, int(np.argmax(self.coords >= self.dim)), side="right") - 1)
            raise CoordinateOutOfRangeError(doc)
        bad = ~np.isfinite(self.values) | (self.values == 0)
        if bad.any():
            doc = int(np.searchsorted(self.offsets, int(np.argmax(bad)), side="right") - 1)
            raise InvalidValueError(doc)
        if nonnegative and self.values.size and self.values.min() < 0:
            doc = int(np.searchsorted(self.offsets, int(np.argmax(self.values < 0)), side="right") - 1)
            raise NegativeValueError(doc)
        # per-vector strictly increasing coordinates
        if self.coords.size:
            c64 = self.coords.astype(np.int64)
            increasing = np.ones(self.coords.size, dtype=bool)
            increasing[1:] = np.diff(c64) > 0
            starts = self.offsets[1:-1]
            increasing[starts[starts < self.coords.size]] = True  # vector boundaries are free
            if not increasing.all():
                doc = int(np.searchsorted(self.offsets, int(np.argmin(increasing)), side="right") - 1)
                raise UnsortedCoordinatesError(doc)

    @classmethod
    def from_vectors(cls, vectors: Sequence[SparseVector], dim: int,
                     *, nonnegative: bool = True) -> "Collection":
        lengths = [v.nnz for v in vectors]
        offsets = np.zeros(len(vectors) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        if vectors:
            coords = np.concatenate([v.coords for v in vectors])
            values = np.concatenate([v.values for v in vectors])
        else:
            coords = np.empty(0, dtype=COORD_DTYPE)
            values = np.empty(0, dtype=VALUE_DTYPE)
        return cls(dim, offsets, coords, values, nonnegative=nonnegative)

    def __len__(self) -> int:
        return int(self.offsets.size - 1)

    def vector(self, doc_id: int) -> SparseVector:
        if not 0 <= doc_id < len(self):
            raise IndexError(f"document id {doc_id} out of range")
        lo, hi = self.offsets[doc_id], self.offsets[doc_id + 1]
        return SparseVector(self.coords[lo:hi], self.values[lo:hi], _checked=True)

    def __iter__(self) -> Iterator[SparseVector]:
        for i in range(len(self)):
            yield self.vector(i)

    def nnz(self) -> int:
        return int(self.coords.size)

    def values_f64(self) -> np.ndarray:
        """Float64 view of the values, cached; scoring kernels read this."""
        if self._values_f64 is None:
            self._values_f64 = _freeze(self.values.astype(np.float64))
        return self._values_f64

    def to_csr(self) -> sp.csr_matrix:
        """CSR matrix over float32 values, cached. Used by index construction."""
        if self._csr is None:
            self._csr = sp.csr_matrix(
                (self.values, self.coords, self.offsets), shape=(len(self), self.dim)
            )
        return self._csr

    def to_csc(self) -> sp.csc_matrix:
        """CSC twin of :meth:`to_csr`; one column per coordinate, row indices
        (document ids) sorted ascending within each column."""
        if self._csc is None:
            csc = self.to_csr().tocsc()
            csc.sort_indices()
            self._csc = csc
        return self._csc


def l1_mass(x: SparseVector) -> float:
    """Sum of absolute values; 0 for an empty vector."""
    return float(np.sum(np.abs(x.values), dtype=np.float64))


def inner_product(a: SparseVector, b: SparseVector) -> float:
    """Dot product over shared coordinates via a sorted merge."""
    if a.nnz > b.nnz:
        a, b = b, a
    if a.nnz == 0:
        return 0.0
    pos = np.searchsorted(b.coords, a.coords)
    pos[pos == b.nnz] = 0
    hit = b.coords[pos] == a.coords
    if not hit.any():
        return 0.0
    return float(
        np.dot(a.values[hit].astype(np.float64), b.values[pos[hit]].astype(np.float64))
    )


def _by_descending_value(x: SparseVector) -> np.ndarray:
    """Entry order: decreasing |value|, ties by ascending coordinate."""
    return np.lexsort((x.coords, -np.abs(x.values.astype(np.float64))))


def alpha_mass_subvector(x: SparseVector, alpha: float) -> SparseVector:
    """Largest prefix of the value-sorted entries whose |mass| stays within
    ``alpha`` times the vector's L1 mass; at least one entry is always kept.

    The retained entries are returned in coordinate order.
    """
    if x.nnz == 0:
        raise ValidationError("alpha-mass subvector of an empty vector")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("alpha must lie in [0, 1]")
    if alpha == 1.0:
        return x
    order = _by_descending_value(x)
    csum = np.cumsum(np.abs(x.values.astype(np.float64))[order])
    budget = alpha * l1_mass(x)
    j = int(np.searchsorted(csum, budget, side="right"))
    j = max(j, 1)

    def take(n: int) -> SparseVector:
        keep = np.sort(order[:n])
        return SparseVector(x.coords[keep], x.values[keep], _checked=True)

    out = take(j)
    # cumsum and the coordinate-ordered re-summation can disagree in the last
    # ulp; back off so the retained mass provably respects the budget
    while j > 1 and l1_mass(out) > budget:
        j -= 1
        out = take(j)
    return out


def top_s_subvector(x: SparseVector, s: int) -> SparseVector:
    """Entries with the ``s`` largest |values| (ties by ascending coordinate),
    re-sorted by coordinate. Returns ``x`` itself when s >= nnz."""
    if s < 1:
        raise ValidationError("s must be >= 1")
    if s >= x.nnz:
        return x
    keep = np.sort(_by_descending_value(x)[:s])
    return SparseVector(x.coords[keep], x.values[keep], _checked=True)
