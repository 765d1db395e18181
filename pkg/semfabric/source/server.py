"""
Semantic source server.

Serves a read-only VectorIndex over HTTP:
    GET  /manifest   source self-description
    POST /query      top-k chunks with provenance
    GET  /healthz    liveness
"""

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional

from flask import Flask, Response, request

from ..embed import HashingEmbedder
from ..errors import IndexLoadError, ValidationFailed
from ..store import ScoredChunk, VectorIndex
from ..wire import (
    PROTOCOL_VERSION,
    Constraints,
    QueryRequestModel,
    SourceManifest,
    constraints_from_model,
    error_body,
    parse_body,
    render,
    render_sized,
)

logger = logging.getLogger(__name__)

JSON = "application/json"

Clock = Callable[[], datetime]


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class SourceServer:
    """
    One source: an index plus the metadata it publishes.

    The index is never mutated while serving; re-ingestion is an offline step.
    """

    def __init__(self, index: Optional[VectorIndex], endpoint: str, clock: Clock = _utcnow):
        self.index = index
        self.endpoint = endpoint
        self.clock = clock
        self.embedder = HashingEmbedder(index.embedder) if index is not None else None

    @staticmethod
    def from_path(path: Path, endpoint: str, clock: Clock = _utcnow) -> 'SourceServer':
        return SourceServer(VectorIndex.load(path), endpoint, clock)

    @property
    def loaded(self) -> bool:
        return self.index is not None

    def manifest(self) -> SourceManifest:
        ix = self.index
        h = ix.header
        return SourceManifest(
            protocol_version=PROTOCOL_VERSION,
            source_id=h.get("source_id", ""),
            endpoint=self.endpoint,
            title=h.get("title", h.get("source_id", "")),
            embedding_model_id=ix.model_id,
            license=h.get("license", "proprietary"),
            topics=list(h.get("topics", [])),
            chunk_count=len(ix),
            summary_text=ix.summary_text,
            updated_at=h.get("updated_at", ""),
            media_types=list(h.get("media_types", [])),
        )

    def query(self, query: str, k: int, constraints: Constraints = Constraints()) -> List[ScoredChunk]:
        """Embed the query, pre-filter by constraints, rank."""
        ix = self.index
        manifest_license = ix.header.get("license", "proprietary")
        if not constraints.topics_ok(ix.header.get("topics", [])):
            return []

        predicate = None
        if not constraints.empty:
            now = self.clock()

            def predicate(chunk):
                return constraints.admits_chunk(chunk, now, fallback_license=manifest_license)

        return ix.top_k(self.embedder.embed(query), k, predicate=predicate)

    def response_payload(self, scored: List[ScoredChunk]) -> Dict:
        fallback = self.index.header.get("license", "proprietary")
        return {
            "results": [
                {
                    "chunk_id": sc.chunk.chunk_id,
                    "doc_id": sc.chunk.doc_id,
                    "source_id": sc.chunk.source_id,
                    "uri": sc.chunk.uri,
                    "start": sc.chunk.start,
                    "end": sc.chunk.end,
                    "score": sc.score,
                    "text": sc.chunk.text,
                    "digest": sc.chunk.digest,
                    "license": sc.chunk.license or fallback,
                    "media_type": sc.chunk.media_type,
                    "updated_at": sc.chunk.fetched_at,
                }
                for sc in scored
            ]
        }


def _json(body: bytes, status: int = 200) -> Response:
    return Response(body, status=status, mimetype=JSON)


def create_source_app(server: SourceServer) -> Flask:
    """Flask app exposing one SourceServer."""
    app = Flask(__name__)

    @app.get("/healthz")
    def healthz():
        return _json(render({"status": "ok", "loaded": server.loaded}))

    @app.get("/manifest")
    def manifest():
        if not server.loaded:
            return _json(error_body("index_not_loaded"), 503)
        return _json(render(server.manifest().to_dict()))

    @app.post("/query")
    def query():
        if not server.loaded:
            return _json(error_body("index_not_loaded"), 503)
        try:
            req = parse_body(request.get_data(), QueryRequestModel)
        except ValidationFailed as e:
            return _json(error_body(str(e), fields=e.fields), 400)

        scored = server.query(req.query, req.k, constraints_from_model(req.constraints))
        return _json(render_sized(server.response_payload(scored)))

    @app.errorhandler(404)
    def not_found(_):
        return _json(error_body("not_found"), 404)

    @app.errorhandler(405)
    def not_allowed(_):
        return _json(error_body("method_not_allowed"), 405)

    return app


def load_server(path: Optional[Path], endpoint: str) -> SourceServer:
    """Load an index for serving; a missing or broken index yields an unloaded server."""
    if path is None:
        return SourceServer(None, endpoint)
    try:
        return SourceServer.from_path(path, endpoint)
    except IndexLoadError as e:
        logger.error("%s", e)
        return SourceServer(None, endpoint)
