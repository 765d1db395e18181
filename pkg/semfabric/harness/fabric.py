"""
In-process retrieval fabric.

Builds the central index, one index per source and a resolver from a corpus
directory, mounts their Flask apps on pseudo hosts of an httpx client, and
registers every source with the resolver over HTTP. Experiments and tests
then run the real wire protocol without opening sockets.
"""

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional

import httpx

from ..agent import AgentClient
from ..chunker import SplitParams
from ..corpus import Document, QaItem, load_catalog, load_corpus
from ..embed import EmbedderSpec
from ..errors import RetrievalError
from ..resolver import Registry, create_resolver_app
from ..source import (
    CENTRAL_SOURCE_ID,
    SourceServer,
    build_central_index,
    create_source_app,
    ingest_corpus,
)
from ..store import VectorIndex
from ..wire import render

logger = logging.getLogger(__name__)

FABRIC_DOMAIN = "fabric.local"
RESOLVER_URL = f"http://resolver.{FABRIC_DOMAIN}"
CENTRAL_URL = f"http://{CENTRAL_SOURCE_ID}.{FABRIC_DOMAIN}"


def source_url(source_id: str) -> str:
    return f"http://{source_id}.{FABRIC_DOMAIN}"


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class LocalFabric:
    """Central source, per-source servers and a resolver behind one httpx client."""

    def __init__(
        self,
        corpus_path: Path,
        params: SplitParams = SplitParams(),
        spec: EmbedderSpec = EmbedderSpec(),
        clock: Callable[[], datetime] = _utcnow,
        transport_wrapper: Optional[Callable[[httpx.BaseTransport], httpx.BaseTransport]] = None,
    ):
        """
        Args:
            corpus_path: Corpus directory
            params: Chunking parameters for every index
            spec: Embedder for every index and the resolver
            clock: Reference time for freshness constraints
            transport_wrapper: Optional wrapper around each mounted transport
                (tests use it to record traffic)
        """
        self.corpus_path = Path(corpus_path)
        self.clock = clock
        self.documents: List[Document]
        self.questions: List[QaItem]
        self.documents, self.questions = load_corpus(self.corpus_path)
        self.catalog = load_catalog(self.corpus_path)

        self.source_indexes: Dict[str, VectorIndex] = ingest_corpus(
            self.documents, self.catalog, params, spec)
        self.central_index = build_central_index(self.source_indexes, self.catalog, spec)
        self.registry = Registry(clock=clock)

        wrap = transport_wrapper or (lambda t: t)
        mounts = {}
        self.servers: Dict[str, SourceServer] = {}
        for sid, index in self.source_indexes.items():
            server = SourceServer(index, source_url(sid), clock)
            self.servers[sid] = server
            mounts[source_url(sid)] = wrap(httpx.WSGITransport(app=create_source_app(server)))
        self.central = SourceServer(self.central_index, CENTRAL_URL, clock)
        mounts[CENTRAL_URL] = wrap(httpx.WSGITransport(app=create_source_app(self.central)))
        mounts[RESOLVER_URL] = wrap(httpx.WSGITransport(app=create_resolver_app(self.registry)))

        self.client = httpx.Client(mounts=mounts)
        for server in self.servers.values():
            self._register(server)
        logger.info("fabric up: %d sources, %d central chunks",
                    len(self.servers), len(self.central_index))

    def _register(self, server: SourceServer):
        url = RESOLVER_URL + "/register"
        response = self.client.post(url, content=render(server.manifest().to_dict()),
                                    headers={"Content-Type": "application/json"})
        if response.status_code != 200:
            raise RetrievalError(url, f"registration of {server.endpoint} failed: {response.text}")

    @property
    def documents_by_id(self) -> Dict[str, Document]:
        return {d.doc_id: d for d in self.documents}

    def agent(self, parallelism: int = 8, chars_per_token: int = 4) -> AgentClient:
        return AgentClient(client=self.client, parallelism=parallelism,
                           chars_per_token=chars_per_token, clock=self.clock)

    def close(self):
        self.client.close()

    def __enter__(self) -> 'LocalFabric':
        return self

    def __exit__(self, *exc):
        self.close()
