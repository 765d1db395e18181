"""Tests for corpus loading, normalization and the fixture generator."""

import json
import tempfile
from pathlib import Path

import pytest

from semfabric.corpus import (
    FixtureManifest,
    MediaType,
    load_catalog,
    load_corpus,
    normalize_document,
    write_fixture_corpus,
)
from semfabric.errors import CorpusError

DATA = Path(__file__).parent / "data"


def _write_corpus(root: Path, sources, questions, files):
    (root / "docs").mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (root / "docs" / name).write_bytes(content)
    (root / "sources.jsonl").write_text("".join(json.dumps(s) + "\n" for s in sources))
    (root / "questions.jsonl").write_text("".join(json.dumps(q) + "\n" for q in questions))


def _source(doc_id, file, media_type="plain", source_id="src-a"):
    return {"doc_id": doc_id, "source_id": source_id, "uri": f"https://a.example/{doc_id}",
            "media_type": media_type, "fetched_at": "2025-03-01T00:00:00Z", "file": file}


def test_normalize_html_paragraphs():
    """Block tags become blank lines."""
    text = normalize_document(b"<p>Hello</p><p>World</p>", MediaType.HTML)
    assert text == "Hello\n\nWorld"


def test_normalize_plain_line_endings():
    """Test CRLF and lone CR become LF."""
    assert normalize_document(b"a\r\nb", MediaType.PLAIN) == "a\nb"
    assert normalize_document(b"a\rb\r\n", MediaType.MARKDOWN) == "a\nb\n"


def test_normalize_invalid_utf8_is_replaced():
    """Test invalid UTF-8 decodes to the replacement character."""
    text = normalize_document(b"caf\xff!", MediaType.PLAIN)
    assert text == "caf\ufffd!"


def test_normalize_html_golden():
    """Test HTML normalization against the frozen expected text."""
    raw = (DATA / "tide.html").read_bytes()
    expected = (DATA / "tide.expected.txt").read_text(encoding="utf-8")
    text = normalize_document(raw, MediaType.HTML)
    assert text == expected
    assert "\r" not in text
    assert "alert" not in text
    assert "color" not in text


def test_normalize_html_entities():
    """Test the common entities decode; other named entities decode too."""
    raw = b"<p>a &amp; b &lt;c&gt; &quot;d&quot; &apos;e&apos;&nbsp;f &eacute;</p>"
    assert normalize_document(raw, MediaType.HTML) == "a & b <c> \"d\" 'e' f \u00e9"


def test_normalize_idempotent():
    """Test normalizing twice changes nothing."""
    samples = ["a\r\n\r\nb", "plain text\n", "x\ry\r\n z", ""]
    for s in samples:
        once = normalize_document(s.encode(), MediaType.PLAIN)
        twice = normalize_document(once.encode(), MediaType.PLAIN)
        assert once == twice


def test_load_single_doc_and_question():
    """Test loading a one-document corpus."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        _write_corpus(
            root,
            [_source("d1", "d1.txt")],
            [{"qid": "q1", "question": "What?", "answers": ["x"], "source_rank": ["d1"]}],
            {"d1.txt": b"hello\r\nworld"},
        )
        docs, questions = load_corpus(root)

        assert len(docs) == 1 and len(questions) == 1
        assert docs[0].text == "hello\nworld"
        assert docs[0].raw_bytes_len == len(b"hello\r\nworld")
        assert docs[0].media_type is MediaType.PLAIN
        assert questions[0].source_rank == ["d1"]


def test_load_empty_questions():
    """Test an empty questions file."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        _write_corpus(root, [_source("d1", "d1.txt")], [], {"d1.txt": b"text"})
        docs, questions = load_corpus(root)
        assert len(docs) == 1
        assert questions == []


def test_load_sorted_by_id():
    """Test documents and questions come back sorted by id."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        _write_corpus(
            root,
            [_source("d2", "d2.txt"), _source("d1", "d1.txt")],
            [{"qid": "q2", "question": "B?", "answers": ["b"], "source_rank": []},
             {"qid": "q1", "question": "A?", "answers": ["a"], "source_rank": ["d2"]}],
            {"d1.txt": b"one", "d2.txt": b"two"},
        )
        docs, questions = load_corpus(root)
        assert [d.doc_id for d in docs] == ["d1", "d2"]
        assert [q.qid for q in questions] == ["q1", "q2"]


def test_load_missing_file_names_it():
    """Test a missing questions file is named in the error."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        (root / "docs").mkdir()
        (root / "sources.jsonl").write_text("")
        with pytest.raises(CorpusError) as exc:
            load_corpus(root)
        assert "questions.jsonl" in str(exc.value)


def test_load_dangling_doc_id():
    """Test a question pointing at an unknown document."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        _write_corpus(
            root,
            [_source("d1", "d1.txt")],
            [{"qid": "q7", "question": "?", "answers": ["x"], "source_rank": ["nope"]}],
            {"d1.txt": b"text"},
        )
        with pytest.raises(CorpusError) as exc:
            load_corpus(root)
        assert "q7" in str(exc.value)
        assert "nope" in str(exc.value)


def test_load_malformed_line_number():
    """Test malformed JSON reports its line number."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        _write_corpus(root, [_source("d1", "d1.txt")], [], {"d1.txt": b"text"})
        with open(root / "sources.jsonl", "a") as f:
            f.write("{not json\n")
        with pytest.raises(CorpusError) as exc:
            load_corpus(root)
        assert exc.value.line == 2


def test_load_rejects_bad_fetched_at():
    """Test a non-ISO fetched_at is rejected with its line."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        bad = _source("d2", "d2.txt")
        bad["fetched_at"] = "March 2025"
        _write_corpus(root, [_source("d1", "d1.txt"), bad], [], {"d1.txt": b"one", "d2.txt": b"two"})
        with pytest.raises(CorpusError) as exc:
            load_corpus(root)
        assert exc.value.line == 2
        assert "March 2025" in str(exc.value)


def test_load_rejects_duplicate_qid():
    """Test a repeated qid is an error, not a silent replacement."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        item = {"qid": "q1", "question": "A?", "answers": ["a"], "source_rank": ["d1"]}
        _write_corpus(root, [_source("d1", "d1.txt")], [item, item], {"d1.txt": b"text"})
        with pytest.raises(CorpusError) as exc:
            load_corpus(root)
        assert exc.value.line == 2
        assert "q1" in str(exc.value)


def test_load_rejects_string_answers():
    """Test answers given as a bare string."""
    with tempfile.TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        _write_corpus(
            root,
            [_source("d1", "d1.txt")],
            [{"qid": "q1", "question": "A?", "answers": "xyz", "source_rank": ["d1"]}],
            {"d1.txt": b"text"},
        )
        with pytest.raises(CorpusError) as exc:
            load_corpus(root)
        assert exc.value.line == 1


def test_load_twice_is_identical():
    """Test loading is deterministic."""
    with tempfile.TemporaryDirectory() as tmpdir:
        write_fixture_corpus(tmpdir)
        first = load_corpus(tmpdir)
        second = load_corpus(tmpdir)
        dump = lambda c: json.dumps([[d.to_dict() for d in c[0]], [q.to_dict() for q in c[1]]])
        assert dump(first) == dump(second)


def test_catalog_defaults_when_absent():
    """Test a corpus without catalog.jsonl."""
    with tempfile.TemporaryDirectory() as tmpdir:
        assert load_catalog(tmpdir) == {}


def test_fixture_counts_match_manifest():
    """Test the fixture matches its recorded counts."""
    with tempfile.TemporaryDirectory() as tmpdir:
        manifest = write_fixture_corpus(tmpdir)
        docs, questions = load_corpus(tmpdir)
        catalog = load_catalog(tmpdir)

        assert len(docs) == manifest.documents == 40
        assert len(questions) == manifest.questions == 50
        assert len({d.source_id for d in docs}) == manifest.sources == 20
        assert sorted(catalog) == manifest.source_ids
        assert manifest.decomposed + manifest.rephrased + manifest.unchanged == manifest.questions
        assert FixtureManifest.load(tmpdir).to_dict() == manifest.to_dict()

        media = {d.media_type for d in docs}
        assert media == {MediaType.PLAIN, MediaType.MARKDOWN, MediaType.HTML}


def test_fixture_answers_are_planted():
    """Test every answer appears in its answer document."""
    with tempfile.TemporaryDirectory() as tmpdir:
        manifest = write_fixture_corpus(tmpdir)
        docs, questions = load_corpus(tmpdir)
        by_id = {d.doc_id: d for d in docs}
        for item in questions:
            answer_doc = manifest.answer_docs[item.qid][0]
            assert answer_doc in item.source_rank
            assert item.answer_aliases[0] in by_id[answer_doc].text


def test_fixture_is_deterministic():
    """Test the same seed writes the same files."""
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        write_fixture_corpus(a, seed=3)
        write_fixture_corpus(b, seed=3)
        for name in ("sources.jsonl", "questions.jsonl", "catalog.jsonl"):
            assert (Path(a) / name).read_bytes() == (Path(b) / name).read_bytes()
