"""
Offline ingestion: documents -> chunks -> vectors -> persisted index.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

from ..chunker import SplitParams, chunk_document
from ..corpus import Document, SourceInfo, documents_by_source
from ..embed import EmbedderSpec
from ..errors import IngestionError
from ..store import VectorIndex

logger = logging.getLogger(__name__)

CENTRAL_SOURCE_ID = "central"


def _source_header(info: SourceInfo, documents: List[Document]) -> Dict:
    return {
        "source_id": info.source_id,
        "title": info.title,
        "license": info.license,
        "topics": list(info.topics),
        "updated_at": max((d.fetched_at for d in documents), default=""),
        "media_types": sorted({d.media_type.value for d in documents}),
    }


def build_index(
    documents: List[Document],
    params: SplitParams = SplitParams(),
    spec: EmbedderSpec = EmbedderSpec(),
    info: Optional[SourceInfo] = None,
) -> VectorIndex:
    """
    Chunk, embed and index the documents of one source.

    Raises:
        IngestionError: documents span more than one source_id
    """
    source_ids = sorted({d.source_id for d in documents})
    if len(source_ids) > 1:
        raise IngestionError(f"documents belong to several sources: {', '.join(source_ids)}")
    if info is None:
        info = SourceInfo.default(source_ids[0] if source_ids else "")
    elif source_ids and info.source_id != source_ids[0]:
        raise IngestionError(f"source info {info.source_id} does not match documents of {source_ids[0]}")

    index = VectorIndex(spec, header=_source_header(info, documents))
    chunks = []
    for doc in sorted(documents, key=lambda d: d.doc_id):
        chunks.extend(chunk_document(doc, params, license=info.license))
    index.upsert(chunks)
    logger.info("indexed %d chunks for source %s", len(index), info.source_id or "<empty>")
    return index


def ingest_source(
    documents: List[Document],
    out_path: Path,
    params: SplitParams = SplitParams(),
    spec: EmbedderSpec = EmbedderSpec(),
    info: Optional[SourceInfo] = None,
) -> VectorIndex:
    """Build a source index and persist it to out_path."""
    index = build_index(documents, params, spec, info)
    index.persist(out_path)
    return index


def build_central_index(
    source_indexes: Dict[str, VectorIndex],
    catalog: Dict[str, SourceInfo],
    spec: EmbedderSpec = EmbedderSpec(),
) -> VectorIndex:
    """Merge per-source indexes into one global index, reusing their vectors."""
    topics = sorted({t for info in catalog.values() for t in info.topics})
    updated = max((ix.header.get("updated_at", "") for ix in source_indexes.values()), default="")
    media = sorted({m for ix in source_indexes.values() for m in ix.header.get("media_types", [])})
    central = VectorIndex(spec, header={
        "source_id": CENTRAL_SOURCE_ID,
        "title": "Central index",
        "license": "mixed",
        "topics": topics,
        "updated_at": updated,
        "media_types": media,
    })
    chunks, vectors = [], []
    for sid in sorted(source_indexes):
        for chunk, vec in source_indexes[sid].entries():
            chunks.append(chunk)
            vectors.append(vec)
    central.upsert(chunks, vectors)
    return central


def ingest_corpus(
    documents: List[Document],
    catalog: Dict[str, SourceInfo],
    params: SplitParams = SplitParams(),
    spec: EmbedderSpec = EmbedderSpec(),
) -> Dict[str, VectorIndex]:
    """Per-source indexes for a whole corpus, keyed by source_id."""
    return {
        sid: build_index(docs, params, spec, catalog.get(sid, SourceInfo.default(sid)))
        for sid, docs in documents_by_source(documents).items()
    }
