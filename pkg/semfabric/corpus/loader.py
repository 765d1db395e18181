"""
Corpus loading.

A corpus directory holds:
    sources.jsonl     one line per document
    questions.jsonl   one line per QA item
    docs/             raw document files
    catalog.jsonl     optional per-source metadata (title, license, topics)
"""

import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Dict, Iterator, List, Tuple

from ..errors import CorpusError
from ..wire import parse_timestamp
from .normalize import MediaType, normalize_document

logger = logging.getLogger(__name__)

SOURCES_FILE = "sources.jsonl"
QUESTIONS_FILE = "questions.jsonl"
CATALOG_FILE = "catalog.jsonl"
DOCS_DIR = "docs"


@dataclass
class Document:
    """A normalized corpus document."""
    doc_id: str
    source_id: str
    uri: str
    media_type: MediaType
    text: str
    raw_bytes_len: int
    fetched_at: str  # ISO-8601 UTC

    def to_dict(self) -> Dict:
        d = asdict(self)
        d['media_type'] = self.media_type.value
        return d


@dataclass
class QaItem:
    """A question with accepted answers and its search ranking."""
    qid: str
    question: str
    answer_aliases: List[str]
    source_rank: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class SourceInfo:
    """Publisher-declared metadata for one source."""
    source_id: str
    title: str
    license: str = "proprietary"
    topics: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)

    @staticmethod
    def default(source_id: str) -> 'SourceInfo':
        return SourceInfo(source_id=source_id, title=source_id)


def _read_jsonl(path: Path) -> Iterator[Tuple[int, Dict]]:
    if not path.exists():
        raise CorpusError("missing corpus file", path=str(path))
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"malformed JSON: {e.msg}", path=str(path), line=lineno)
            if not isinstance(obj, dict):
                raise CorpusError("expected a JSON object", path=str(path), line=lineno)
            yield lineno, obj


def _require(obj: Dict, keys: Tuple[str, ...], path: Path, lineno: int):
    missing = [k for k in keys if k not in obj]
    if missing:
        raise CorpusError(f"missing field(s) {', '.join(missing)}", path=str(path), line=lineno)


def _load_documents(root: Path) -> List[Document]:
    sources_path = root / SOURCES_FILE
    docs_dir = root / DOCS_DIR
    if not docs_dir.is_dir():
        raise CorpusError("missing docs directory", path=str(docs_dir))

    documents: Dict[str, Document] = {}
    for lineno, obj in _read_jsonl(sources_path):
        _require(obj, ("doc_id", "source_id", "uri", "media_type", "fetched_at", "file"),
                 sources_path, lineno)
        doc_id = obj["doc_id"]
        if doc_id in documents:
            raise CorpusError(f"duplicate doc_id {doc_id}", path=str(sources_path), line=lineno)
        try:
            media_type = MediaType(obj["media_type"])
        except ValueError:
            raise CorpusError(f"unknown media_type {obj['media_type']!r}",
                              path=str(sources_path), line=lineno)

        try:
            parse_timestamp(obj["fetched_at"])
        except (TypeError, ValueError):
            raise CorpusError(f"fetched_at {obj['fetched_at']!r} is not an ISO-8601 timestamp",
                              path=str(sources_path), line=lineno)

        file_path = docs_dir / obj["file"]
        if not file_path.exists():
            raise CorpusError(f"missing document file for {doc_id}", path=str(file_path))
        raw = file_path.read_bytes()

        documents[doc_id] = Document(
            doc_id=doc_id,
            source_id=obj["source_id"],
            uri=obj["uri"],
            media_type=media_type,
            text=normalize_document(raw, media_type),
            raw_bytes_len=len(raw),
            fetched_at=obj["fetched_at"],
        )

    return [documents[k] for k in sorted(documents)]


def _load_questions(root: Path, doc_ids: set) -> List[QaItem]:
    questions_path = root / QUESTIONS_FILE
    items: Dict[str, QaItem] = {}
    for lineno, obj in _read_jsonl(questions_path):
        _require(obj, ("qid", "question", "answers", "source_rank"), questions_path, lineno)
        qid = obj["qid"]
        if qid in items:
            raise CorpusError(f"duplicate qid {qid}", path=str(questions_path), line=lineno)
        if not isinstance(obj["answers"], list):
            raise CorpusError(f"question {qid}: answers must be a list", path=str(questions_path), line=lineno)
        answers = [a for a in obj["answers"] if isinstance(a, str) and a.strip()]
        if not answers:
            raise CorpusError(f"question {qid} has no answers", path=str(questions_path), line=lineno)
        for doc_id in obj["source_rank"]:
            if doc_id not in doc_ids:
                raise CorpusError(f"question {qid} references unknown doc_id {doc_id}",
                                  path=str(questions_path), line=lineno)
        items[qid] = QaItem(
            qid=qid,
            question=obj["question"],
            answer_aliases=answers,
            source_rank=list(obj["source_rank"]),
        )
    return [items[k] for k in sorted(items)]


def load_corpus(path: Path) -> Tuple[List[Document], List[QaItem]]:
    """
    Load and normalize a corpus directory.

    Returns:
        (documents sorted by doc_id, questions sorted by qid)
    """
    root = Path(path)
    documents = _load_documents(root)
    questions = _load_questions(root, {d.doc_id for d in documents})
    logger.debug("loaded %d documents and %d questions from %s",
                 len(documents), len(questions), root)
    return documents, questions


def load_catalog(path: Path) -> Dict[str, SourceInfo]:
    """Per-source metadata; sources absent from the catalog get defaults."""
    catalog_path = Path(path) / CATALOG_FILE
    if not catalog_path.exists():
        return {}
    catalog = {}
    for lineno, obj in _read_jsonl(catalog_path):
        _require(obj, ("source_id",), catalog_path, lineno)
        sid = obj["source_id"]
        catalog[sid] = SourceInfo(
            source_id=sid,
            title=obj.get("title", sid),
            license=obj.get("license", "proprietary"),
            topics=list(obj.get("topics", [])),
        )
    return catalog


def documents_by_source(documents: List[Document]) -> Dict[str, List[Document]]:
    grouped: Dict[str, List[Document]] = {}
    for doc in documents:
        grouped.setdefault(doc.source_id, []).append(doc)
    return {sid: grouped[sid] for sid in sorted(grouped)}
