"""
Exact top-k vector index over chunks.

Entries are kept in canonical chunk_id order. Persistence is a JSON-lines
file: a header line followed by one line per entry.
"""

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from ..chunker import Chunk
from ..digest import canonical_json, fnv1a_64, utf8_len
from ..embed import (
    EmbedderSpec,
    EmbeddingVector,
    HashingEmbedder,
    check_compatible,
    score_rows,
)
from ..errors import IndexLoadError, ParameterError
from ..wire import SUMMARY_LIMIT

logger = logging.getLogger(__name__)

INDEX_VERSION = 1


@dataclass
class ScoredChunk:
    """A chunk with its similarity score and payload size."""
    chunk: Chunk
    score: float
    payload_bytes: int = field(default=-1)

    def __post_init__(self):
        if self.payload_bytes < 0:
            self.payload_bytes = utf8_len(self.chunk.text)

    def to_dict(self) -> Dict:
        return {"chunk": self.chunk.to_dict(), "score": self.score,
                "payload_bytes": self.payload_bytes}


class VectorIndex:
    """
    In-memory exact cosine index.

    Readers take a snapshot of (entries, matrix) under the lock, so a query
    never sees a half-applied upsert batch.
    """

    def __init__(self, embedder: EmbedderSpec = EmbedderSpec(), header: Optional[Dict] = None):
        embedder.validate()
        self.embedder = embedder
        self.header: Dict = dict(header or {})
        self.summary_text = ""
        self._lock = threading.RLock()
        self._entries: Dict[str, tuple] = {}  # chunk_id -> (Chunk, EmbeddingVector)
        self._order: List[str] = []
        self._matrix = np.zeros((0, embedder.dim), dtype=np.float32)
        self._embedder_impl = HashingEmbedder(embedder)

    def __len__(self) -> int:
        return len(self._order)

    @property
    def model_id(self) -> str:
        return self.embedder.model_id

    def entries(self) -> List[tuple]:
        with self._lock:
            return [self._entries[cid] for cid in self._order]

    def chunks(self) -> List[Chunk]:
        return [c for c, _ in self.entries()]

    def get(self, chunk_id: str) -> Optional[Chunk]:
        entry = self._entries.get(chunk_id)
        return entry[0] if entry else None

    def doc_ids(self) -> List[str]:
        return sorted({c.doc_id for c, _ in self.entries()})

    def upsert(self, chunks: Iterable[Chunk], vectors: Optional[List[EmbeddingVector]] = None) -> 'VectorIndex':
        """Embed and insert chunks; an existing chunk_id is replaced."""
        chunks = list(chunks)
        if vectors is None:
            vectors = [self._embedder_impl.embed(c.text) for c in chunks]
        for vec in vectors:
            check_compatible(self.model_id, self.embedder.dim, vec.model_id, vec.dim)

        with self._lock:
            staged = dict(self._entries)
            for chunk, vec in zip(chunks, vectors):
                staged[chunk.chunk_id] = (chunk, vec)
            order = sorted(staged)
            if order:
                matrix = np.vstack([staged[cid][1].values for cid in order]).astype(np.float32)
            else:
                matrix = np.zeros((0, self.embedder.dim), dtype=np.float32)
            self._entries, self._order, self._matrix = staged, order, matrix
            self.summary_text = self._build_summary()
        return self

    def _build_summary(self) -> str:
        first_by_doc: Dict[str, Chunk] = {}
        for cid in self._order:
            chunk = self._entries[cid][0]
            prev = first_by_doc.get(chunk.doc_id)
            if prev is None or chunk.start < prev.start:
                first_by_doc[chunk.doc_id] = chunk
        text = "".join(first_by_doc[d].text for d in sorted(first_by_doc))
        return text[:SUMMARY_LIMIT]

    def top_k(
        self,
        query_vec: EmbeddingVector,
        k: int,
        predicate: Optional[Callable[[Chunk], bool]] = None,
    ) -> List[ScoredChunk]:
        """
        The k best entries by cosine, ties broken by ascending chunk_id.

        Args:
            query_vec: Query embedding from the same model
            k: Number of results (>= 0)
            predicate: Optional filter applied before ranking
        """
        if k < 0:
            raise ParameterError(f"k must be >= 0, got {k}")
        check_compatible(self.model_id, self.embedder.dim, query_vec.model_id, query_vec.dim)

        with self._lock:
            order, matrix, entries = self._order, self._matrix, self._entries

        if predicate is not None:
            keep = [i for i, cid in enumerate(order) if predicate(entries[cid][0])]
            order = [order[i] for i in keep]
            matrix = matrix[keep] if keep else matrix[:0]

        if k == 0 or not order:
            return []

        if query_vec.is_zero:
            scores = np.zeros(len(order), dtype=np.float64)
        else:
            scores = score_rows(matrix, query_vec.values)

        # order is sorted by chunk_id, so a stable sort on -score keeps the tie rule
        ranked = np.argsort(-scores, kind="stable")[:k]
        return [ScoredChunk(chunk=entries[order[i]][0], score=float(scores[i])) for i in ranked]

    # --- persistence -------------------------------------------------------

    def _header_dict(self) -> Dict:
        header = dict(self.header)
        header.update({
            "version": INDEX_VERSION,
            "summary_text": self.summary_text,
        })
        header.update(self.embedder.to_dict())
        return header

    def canonical_bytes(self) -> bytes:
        lines = [canonical_json(self._header_dict())]
        for chunk, vec in self.entries():
            lines.append(canonical_json({"chunk": chunk.to_dict(), "vector": vec.to_list()}))
        return b"\n".join(lines) + b"\n"

    def digest(self) -> str:
        return f"{fnv1a_64(self.canonical_bytes()):016x}"

    def persist(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(self.canonical_bytes())
        tmp.replace(path)
        logger.debug("persisted %d entries to %s", len(self), path)
        return path

    @staticmethod
    def load(path: Path) -> 'VectorIndex':
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as e:
            raise IndexLoadError(str(e), path=str(path))
        if not data.endswith(b"\n"):
            raise IndexLoadError("truncated file (no trailing newline)", path=str(path))

        lines = data.split(b"\n")[:-1]
        if not lines:
            raise IndexLoadError("empty file", path=str(path))
        try:
            header = json.loads(lines[0])
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise IndexLoadError("corrupt header", path=str(path))
        if not isinstance(header, dict):
            raise IndexLoadError("corrupt header", path=str(path))
        if header.get("version") != INDEX_VERSION:
            raise IndexLoadError(f"unsupported version {header.get('version')!r}", path=str(path))

        try:
            spec = EmbedderSpec.from_dict(header)
        except (KeyError, TypeError, ValueError):
            raise IndexLoadError("header lacks model_id/dim", path=str(path))

        extra = {k: v for k, v in header.items()
                 if k not in ("version", "model_id", "dim", "ngram", "summary_text")}
        index = VectorIndex(spec, header=extra)

        chunks, vectors = [], []
        for lineno, raw in enumerate(lines[1:], 2):
            try:
                obj = json.loads(raw)
                chunk = Chunk.from_dict(obj["chunk"])
                vec = EmbeddingVector.from_list(spec.model_id, obj["vector"])
            except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError, ValueError) as e:
                raise IndexLoadError(f"corrupt entry on line {lineno}: {e}", path=str(path))
            if vec.dim != spec.dim:
                raise IndexLoadError(f"vector dim {vec.dim} != {spec.dim} on line {lineno}",
                                     path=str(path))
            chunks.append(chunk)
            vectors.append(vec)

        index.upsert(chunks, vectors)
        if index.summary_text != header.get("summary_text", ""):
            raise IndexLoadError("summary_text does not match entries", path=str(path))
        return index
