"""Tests for the exact vector index and its persistence."""

import random
import tempfile
from pathlib import Path

import pytest

from semfabric.chunker import Chunk
from semfabric.digest import text_digest
from semfabric.embed import EmbedderSpec, cosine, embed
from semfabric.errors import ComparisonError, IndexLoadError, ParameterError
from semfabric.store import SUMMARY_LIMIT, VectorIndex

WORDS = ["tide", "harbour", "comet", "orchard", "guild", "tower", "alloy", "river",
         "festival", "engine", "survey", "archive"]


def _chunk(doc_id, start, text):
    end = start + len(text)
    return Chunk(chunk_id=Chunk.make_id(doc_id, start, end), doc_id=doc_id, source_id="src-a",
                 start=start, end=end, text=text, digest=text_digest(text),
                 fetched_at="2025-03-01T00:00:00Z", license="mit")


def _random_chunks(rng, n):
    chunks = []
    for i in range(n):
        text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(3, 12)))
        chunks.append(_chunk(f"d{i % 5}", i * 100, text))
    return chunks


def _oracle(chunks, query, k):
    qv = embed(query)
    scored = [(cosine(embed(c.text), qv), c.chunk_id) for c in chunks]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [cid for _, cid in scored[:k]]


def test_empty_index():
    """Test an empty index."""
    index = VectorIndex()
    assert len(index) == 0
    assert index.top_k(embed("anything"), 5) == []
    assert index.summary_text == ""


def test_upsert_is_idempotent():
    """Test upserting the same chunks twice."""
    chunks = _random_chunks(random.Random(1), 10)
    index = VectorIndex().upsert(chunks)
    before = index.digest()
    index.upsert(chunks)
    assert len(index) == 10
    assert index.digest() == before


def test_upsert_replaces_by_chunk_id():
    """Test upsert replaces an existing chunk_id."""
    index = VectorIndex().upsert([_chunk("d1", 0, "old text here")])
    replacement = _chunk("d1", 0, "new text here")
    index.upsert([replacement])
    assert len(index) == 1
    assert index.get("d1#0-13").text == "new text here"


def test_top_k_matches_bruteforce():
    """Test top-k against a brute-force scan, ties included."""
    rng = random.Random(5)
    chunks = _random_chunks(rng, 60)
    # duplicate texts force ties broken by chunk_id
    chunks += [_chunk("dup", 1000 + i * 50, "tide harbour comet") for i in range(4)]
    index = VectorIndex().upsert(chunks)

    for query in ["tide harbour comet", "guild tower", "festival engine survey", "zz"]:
        for k in (1, 3, 10, 100):
            got = [sc.chunk.chunk_id for sc in index.top_k(embed(query), k)]
            assert got == _oracle(chunks, query, k)


def test_top_k_matches_bruteforce_across_many_indexes():
    """Test exact top-k against a cosine scan over 50 indexes and 20 queries each."""
    rng = random.Random(77)
    for n in [2000] + [rng.randint(1, 600) for _ in range(49)]:
        chunks = _random_chunks(rng, n)
        vectors = [embed(c.text) for c in chunks]
        index = VectorIndex().upsert(chunks, vectors)
        for _ in range(20):
            query = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 4)))
            qv = embed(query)
            scored = sorted(((cosine(v, qv), c.chunk_id) for c, v in zip(chunks, vectors)),
                            key=lambda t: (-t[0], t[1]))
            for k in {1, 10, 200, n}:
                got = [(sc.score, sc.chunk.chunk_id) for sc in index.top_k(qv, k)]
                assert got == scored[:k]


def test_top_k_prefixes_nest():
    """Test smaller k is a prefix of larger k."""
    index = VectorIndex().upsert(_random_chunks(random.Random(9), 40))
    qv = embed("orchard river archive")
    full = [sc.chunk.chunk_id for sc in index.top_k(qv, 40)]
    for k in range(0, 41, 7):
        assert [sc.chunk.chunk_id for sc in index.top_k(qv, k)] == full[:k]


def test_top_k_zero_query_orders_by_id():
    """Test a zero query ranks by chunk_id."""
    chunks = _random_chunks(random.Random(2), 8)
    index = VectorIndex().upsert(chunks)
    got = index.top_k(embed(""), 8)
    assert [sc.chunk.chunk_id for sc in got] == sorted(c.chunk_id for c in chunks)
    assert all(sc.score == 0.0 for sc in got)


def test_top_k_predicate_filters_first():
    """Test the predicate filters before ranking."""
    chunks = _random_chunks(random.Random(4), 30)
    index = VectorIndex().upsert(chunks)
    got = index.top_k(embed("tide"), 30, predicate=lambda c: c.doc_id == "d2")
    assert got
    assert {sc.chunk.doc_id for sc in got} == {"d2"}


def test_top_k_rejects_negative_and_foreign_model():
    """Test negative k and foreign model queries."""
    index = VectorIndex().upsert(_random_chunks(random.Random(3), 3))
    with pytest.raises(ParameterError):
        index.top_k(embed("x y z"), -1)
    with pytest.raises(ComparisonError):
        index.top_k(embed("x y z", EmbedderSpec(model_id="other")), 1)


def test_persist_round_trip():
    """Test persisting and loading an index."""
    index = VectorIndex(header={"source_id": "src-a"}).upsert(_random_chunks(random.Random(6), 25))
    with tempfile.TemporaryDirectory() as tmpdir:
        path = index.persist(Path(tmpdir) / "src-a.jsonl")
        loaded = VectorIndex.load(path)

        assert loaded.digest() == index.digest()
        assert loaded.header["source_id"] == "src-a"
        qv = embed("guild survey")
        assert ([sc.chunk.chunk_id for sc in loaded.top_k(qv, 10)]
                == [sc.chunk.chunk_id for sc in index.top_k(qv, 10)])
        assert not Path(str(path) + ".tmp").exists()


def test_load_truncated_file():
    """Test loading a truncated index file."""
    index = VectorIndex().upsert(_random_chunks(random.Random(7), 5))
    with tempfile.TemporaryDirectory() as tmpdir:
        path = index.persist(Path(tmpdir) / "ix.jsonl")
        data = path.read_bytes()
        path.write_bytes(data[:len(data) // 2])
        with pytest.raises(IndexLoadError):
            VectorIndex.load(path)


def test_load_unsupported_version():
    """Test loading an index with an unknown version."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "ix.jsonl"
        path.write_bytes(b'{"version":99,"model_id":"m","dim":256}\n')
        with pytest.raises(IndexLoadError) as exc:
            VectorIndex.load(path)
        assert "version" in exc.value.reason


def test_load_missing_file():
    """Test loading a missing index file."""
    with tempfile.TemporaryDirectory() as tmpdir:
        with pytest.raises(IndexLoadError):
            VectorIndex.load(Path(tmpdir) / "absent.jsonl")


def test_summary_text_is_first_chunk_per_doc():
    """Test the summary is built from each document's first chunk."""
    index = VectorIndex().upsert([
        _chunk("b", 0, "second doc opening "),
        _chunk("a", 50, "later part "),
        _chunk("a", 0, "first doc opening "),
    ])
    assert index.summary_text == "first doc opening second doc opening "


def test_summary_text_is_capped():
    """Test the summary is capped."""
    index = VectorIndex().upsert([_chunk(f"d{i:02d}", 0, "x" * 1000) for i in range(6)])
    assert len(index.summary_text) == SUMMARY_LIMIT
