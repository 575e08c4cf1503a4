import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockmips.core import Collection, SparseVector
from blockmips.errors import (
    BadMagicError,
    BadVersionError,
    CoordinateOutOfRangeError,
    GroundTruthFormatError,
    IngestError,
    InvalidValueError,
    TruncatedFileError,
    UnsortedCoordinatesError,
)
from blockmips.io import (
    ingest_jsonl,
    read_collection,
    read_ranked,
    write_collection,
    write_ranked,
)


def sv(*pairs):
    return SparseVector.from_entries(pairs)


@st.composite
def collections(draw, max_docs=8, dim=32):
    n = draw(st.integers(0, max_docs))
    vecs = []
    for _ in range(n):
        nnz = draw(st.integers(0, 6))
        coords = draw(st.lists(st.integers(0, dim - 1), min_size=nnz, max_size=nnz, unique=True))
        values = draw(
            st.lists(
                st.floats(2.0**-10, 1024.0, allow_nan=False, width=32),
                min_size=nnz,
                max_size=nnz,
            )
        )
        vecs.append(SparseVector.from_entries(zip(coords, values)))
    return Collection.from_vectors(vecs, dim)


class TestCollectionFile:
    def test_empty_collection_is_20_bytes(self, tmp_path):
        # 4 magic + 4 version + 4 dim + 8 count
        path = tmp_path / "c.svc"
        n = write_collection(Collection.from_vectors([], dim=10), path)
        assert n == 20
        assert path.stat().st_size == 20

    def test_single_entry_vector_is_32_bytes(self, tmp_path):
        # header 20 + nnz 4 + coord 4 + value 4
        path = tmp_path / "c.svc"
        n = write_collection(Collection.from_vectors([sv((1, 2.0))], dim=8), path)
        assert n == 32

    def test_roundtrip_identity(self, tmp_path):
        vecs = [sv((0, 1.5), (3, 2.0)), SparseVector([], []), sv((7, 0.25))]
        c = Collection.from_vectors(vecs, dim=9)
        path = tmp_path / "c.svc"
        write_collection(c, path)
        back = read_collection(path)
        assert back.dim == c.dim and len(back) == len(c)
        assert np.array_equal(back.offsets, c.offsets)
        assert np.array_equal(back.coords, c.coords)
        assert np.array_equal(back.values, c.values)

    @given(c=collections())
    @settings(max_examples=50, deadline=None)
    def test_roundtrip_bytes_stable(self, tmp_path_factory, c):
        tmp = tmp_path_factory.mktemp("io")
        p1, p2 = tmp / "a.svc", tmp / "b.svc"
        write_collection(c, p1)
        write_collection(read_collection(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "c.svc"
        write_collection(Collection.from_vectors([sv((0, 1.0))], dim=4), path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(BadMagicError):
            read_collection(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "c.svc"
        write_collection(Collection.from_vectors([sv((0, 1.0))], dim=4), path)
        raw = bytearray(path.read_bytes())
        raw[4:8] = (9).to_bytes(4, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(BadVersionError):
            read_collection(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "c.svc"
        write_collection(Collection.from_vectors([sv((0, 1.0), (1, 2.0))], dim=4), path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(TruncatedFileError):
            read_collection(path)

    def test_coordinate_out_of_range_names_doc(self, tmp_path):
        path = tmp_path / "c.svc"
        write_collection(Collection.from_vectors([sv((0, 1.0)), sv((3, 1.0))], dim=4), path)
        raw = bytearray(path.read_bytes())
        # second vector's coordinate lives at offset 20 + 12 + 4
        raw[36:40] = (4).to_bytes(4, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(CoordinateOutOfRangeError) as e:
            read_collection(path)
        assert e.value.doc_id == 1

    def test_unsorted_coordinates_rejected(self, tmp_path):
        path = tmp_path / "c.svc"
        write_collection(Collection.from_vectors([sv((0, 1.0), (2, 2.0))], dim=4), path)
        raw = bytearray(path.read_bytes())
        raw[24:28] = (3).to_bytes(4, "little")  # first coord 0 -> 3 > second coord 2
        path.write_bytes(bytes(raw))
        with pytest.raises(UnsortedCoordinatesError) as e:
            read_collection(path)
        assert e.value.doc_id == 0

    def test_zero_value_rejected(self, tmp_path):
        path = tmp_path / "c.svc"
        write_collection(Collection.from_vectors([sv((0, 1.0))], dim=4), path)
        raw = bytearray(path.read_bytes())
        raw[28:32] = np.zeros(1, dtype="<f4").tobytes()
        path.write_bytes(bytes(raw))
        with pytest.raises(InvalidValueError) as e:
            read_collection(path)
        assert e.value.doc_id == 0

    def test_negative_values_ok_for_queries(self, tmp_path):
        path = tmp_path / "q.svc"
        c = Collection.from_vectors([sv((0, -1.0))], dim=4, nonnegative=False)
        write_collection(c, path)
        back = read_collection(path, role="queries")
        assert back.vector(0).values[0] == -1.0
        from blockmips.errors import NegativeValueError

        with pytest.raises(NegativeValueError):
            read_collection(path)


class TestIngestJsonl:
    def test_sorts_entries(self, tmp_path):
        src = tmp_path / "d.jsonl"
        src.write_text('{"3": 1.5, "1": 2.0}\n')
        c = ingest_jsonl(src, dim=8)
        assert list(c.vector(0).entries()) == [(1, 2.0), (3, 1.5)]

    def test_zero_dropped_empty_kept(self, tmp_path, caplog):
        src = tmp_path / "d.jsonl"
        src.write_text('{"2": 0.0}\n')
        with caplog.at_level("WARNING"):
            c = ingest_jsonl(src, dim=8)
        assert len(c) == 1 and c.vector(0).nnz == 0
        assert any("empty" in r.message for r in caplog.records)

    def test_line_order_preserved(self, tmp_path):
        src = tmp_path / "d.jsonl"
        src.write_text("".join(f'{{"{i % 7}": {i + 1}.0}}\n' for i in range(100)))
        c = ingest_jsonl(src, dim=8)
        assert len(c) == 100
        assert c.vector(41).values[0] == 42.0

    def test_malformed_line_numbered(self, tmp_path):
        src = tmp_path / "d.jsonl"
        src.write_text('{"1": 1.0}\nnot json\n')
        with pytest.raises(IngestError) as e:
            ingest_jsonl(src, dim=8)
        assert e.value.line_no == 2

    def test_negative_document_rejected(self, tmp_path):
        src = tmp_path / "d.jsonl"
        src.write_text('{"1": -1.0}\n')
        with pytest.raises(IngestError):
            ingest_jsonl(src, dim=8)
        c = ingest_jsonl(src, dim=8, role="queries")
        assert c.vector(0).values[0] == -1.0


class TestRankedFiles:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "gt.tsv"
        data = {0: [(5, 2.5), (3, 1.25)], 1: [(9, 0.5)]}
        write_ranked(data, path)
        assert read_ranked(path) == data

    def test_rank_gap_rejected(self, tmp_path):
        path = tmp_path / "gt.tsv"
        path.write_text("0\t1\t5\t2.5\n0\t3\t3\t1.0\n")
        with pytest.raises(GroundTruthFormatError):
            read_ranked(path)

    def test_increasing_score_rejected(self, tmp_path):
        path = tmp_path / "gt.tsv"
        path.write_text("0\t1\t5\t1.0\n0\t2\t3\t2.0\n")
        with pytest.raises(GroundTruthFormatError):
            read_ranked(path)
