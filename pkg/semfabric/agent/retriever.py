"""
Agent-side retrieval strategies.

    centralized     one global source, k chunks per subquery
    decentralized   resolver picks s sources per subquery, k chunks from each
    hybrid          decentralized wide fetch, client-side filter, keep k_final
    full_context    whole documents in search-rank order up to a token budget

Every request body is rendered by the client and every response body is
measured as received, so the ledger holds exact wire sizes.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Tuple

import httpx

from ..chunker import Chunk
from ..corpus import Document, QaItem
from ..digest import canonical_json, text_digest, utf8_len
from ..errors import ParameterError, RetrievalError
from ..resolver import SourceScore
from ..store import ScoredChunk
from ..wire import Constraints
from .ledger import DEFAULT_CHARS_PER_TOKEN, BandwidthLedger, estimate_tokens
from .query_processor import ProcessedQuery

logger = logging.getLogger(__name__)

DEFAULT_PARALLELISM = 8
DEFAULT_TIMEOUT = 30.0
DEFAULT_BUDGET_TOKENS = 250_000

Clock = Callable[[], datetime]


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class RetrievalResult:
    """Merged context plus the traffic it cost."""
    mode: str
    context_chunks: List[ScoredChunk] = field(default_factory=list)
    per_source: Dict[str, List[str]] = field(default_factory=dict)
    ledger: BandwidthLedger = field(default_factory=BandwidthLedger)
    failed_sources: Dict[str, str] = field(default_factory=dict)
    included_docs: List[str] = field(default_factory=list)

    @property
    def chunk_ids(self) -> List[str]:
        return [sc.chunk.chunk_id for sc in self.context_chunks]

    @property
    def context_texts(self) -> List[str]:
        return [sc.chunk.text for sc in self.context_chunks]

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "context_chunks": [
                {
                    "chunk_id": sc.chunk.chunk_id,
                    "source_id": sc.chunk.source_id,
                    "uri": sc.chunk.uri,
                    "score": sc.score,
                    "payload_bytes": sc.payload_bytes,
                    "license": sc.chunk.license,
                    "updated_at": sc.chunk.fetched_at,
                    "text": sc.chunk.text,
                }
                for sc in self.context_chunks
            ],
            "per_source": self.per_source,
            "ledger": self.ledger.to_dict(),
            "failed_sources": self.failed_sources,
            "included_docs": self.included_docs,
        }


def merge(batches: List[List[ScoredChunk]]) -> List[ScoredChunk]:
    """
    Union of scored chunks, deduplicated by chunk_id (best score kept),
    sorted by (score desc, chunk_id asc).
    """
    best: Dict[str, ScoredChunk] = {}
    for batch in batches:
        for sc in batch:
            prev = best.get(sc.chunk.chunk_id)
            if prev is None or sc.score > prev.score:
                best[sc.chunk.chunk_id] = sc
    return sorted(best.values(), key=lambda sc: (-sc.score, sc.chunk.chunk_id))


def group_by_source(chunks: List[ScoredChunk]) -> Dict[str, List[str]]:
    grouped: Dict[str, List[str]] = {}
    for sc in chunks:
        grouped.setdefault(sc.chunk.source_id, []).append(sc.chunk.chunk_id)
    return {sid: grouped[sid] for sid in sorted(grouped)}


def _scored_from_wire(item: Dict) -> ScoredChunk:
    chunk = Chunk(
        chunk_id=item["chunk_id"],
        doc_id=item["doc_id"],
        source_id=item["source_id"],
        start=int(item["start"]),
        end=int(item["end"]),
        text=item["text"],
        digest=item["digest"],
        uri=item.get("uri", ""),
        media_type=item.get("media_type", "plain"),
        fetched_at=item.get("updated_at", ""),
        license=item.get("license", ""),
    )
    return ScoredChunk(chunk=chunk, score=float(item["score"]))


def full_context_documents(
    item: QaItem,
    documents: Dict[str, Document],
    budget_tokens: int = DEFAULT_BUDGET_TOKENS,
    chars_per_token: int = DEFAULT_CHARS_PER_TOKEN,
) -> List[Document]:
    """
    Documents of item.source_rank taken greedily while the token estimate
    stays within budget; a document that would overflow is skipped.
    """
    if budget_tokens < 0:
        raise ParameterError(f"budget_tokens must be >= 0, got {budget_tokens}")
    included, used = [], 0
    for doc_id in item.source_rank:
        doc = documents[doc_id]
        tokens = estimate_tokens(doc.text, chars_per_token)
        if used + tokens <= budget_tokens:
            included.append(doc)
            used += tokens
    return included


class AgentClient:
    """
    HTTP client for sources and the resolver.

    The httpx client may carry WSGI mounts, in which case no sockets are used.
    """

    def __init__(
        self,
        client: Optional[httpx.Client] = None,
        parallelism: int = DEFAULT_PARALLELISM,
        timeout: float = DEFAULT_TIMEOUT,
        chars_per_token: int = DEFAULT_CHARS_PER_TOKEN,
        clock: Clock = _utcnow,
    ):
        """
        Args:
            client: httpx client to use (one is created if omitted)
            parallelism: Max concurrent source requests during fan-out
            timeout: Per-request timeout in seconds
            chars_per_token: Token estimate for full-context mode
            clock: Reference time for client-side freshness filtering
        """
        if parallelism < 1:
            raise ParameterError(f"parallelism must be >= 1, got {parallelism}")
        self.client = client or httpx.Client(timeout=timeout)
        self.parallelism = parallelism
        self.chars_per_token = chars_per_token
        self.clock = clock

    def close(self):
        self.client.close()

    # --- transport ---------------------------------------------------------

    def _post(self, url: str, payload: Dict) -> Tuple[Dict, int, int]:
        """POST canonical JSON; returns (body, request bytes, response bytes)."""
        body = canonical_json(payload)
        try:
            response = self.client.post(url, content=body,
                                        headers={"Content-Type": "application/json"})
        except httpx.HTTPError as e:
            raise RetrievalError(url, f"{type(e).__name__}: {e}")
        if response.status_code != 200:
            raise RetrievalError(url, f"HTTP {response.status_code}: {response.text[:200]}")
        try:
            data = response.json()
        except ValueError:
            raise RetrievalError(url, "response is not JSON")
        return data, len(body), len(response.content)

    def get_json(self, url: str) -> Dict:
        try:
            response = self.client.get(url)
            response.raise_for_status()
            return response.json()
        except (httpx.HTTPError, ValueError) as e:
            raise RetrievalError(url, f"{type(e).__name__}: {e}")

    def query_source(self, endpoint: str, query: str, k: int,
                     constraints: Constraints, ledger: BandwidthLedger) -> List[ScoredChunk]:
        payload = {"query": query, "k": k}
        if not constraints.empty:
            payload["constraints"] = constraints.to_dict()
        data, sent, received = self._post(endpoint.rstrip("/") + "/query", payload)
        ledger.add_source(sent, received)

        scored = []
        for item in data.get("results", []):
            sc = _scored_from_wire(item)
            if text_digest(sc.chunk.text) != sc.chunk.digest:
                logger.warning("dropping chunk %s from %s: digest mismatch",
                               sc.chunk.chunk_id, endpoint)
                continue
            scored.append(sc)
        return scored

    def resolve(self, resolver: str, query: str, s: int, constraints: Constraints,
                ledger: BandwidthLedger) -> List[SourceScore]:
        payload = {"query": query, "s": s}
        if not constraints.empty:
            payload["constraints"] = constraints.to_dict()
        data, sent, received = self._post(resolver.rstrip("/") + "/resolve", payload)
        ledger.add_resolver(sent, received)
        if not data.get("results"):
            logger.debug("resolver returned no sources (filtered_out=%s)", data.get("filtered_out"))
        return [SourceScore.from_dict(r) for r in data.get("results", [])]

    def source_count(self, resolver: str) -> int:
        """Number of registered sources (used for s = all)."""
        return len(self.get_json(resolver.rstrip("/") + "/sources").get("sources", []))

    # --- strategies --------------------------------------------------------

    def retrieve_centralized(self, pq: ProcessedQuery, k: int, central: str,
                             constraints: Constraints = Constraints()) -> RetrievalResult:
        """
        Query the central source with k for each subquery.

        With k = 0 nothing is sent and the context is empty.

        Raises:
            RetrievalError: central source unreachable or failing
        """
        if k < 0:
            raise ParameterError(f"k must be >= 0, got {k}")
        result = RetrievalResult(mode="centralized")
        if k == 0:
            return result
        batches = [self.query_source(central, q, k, constraints, result.ledger)
                   for q in pq.subqueries]
        result.context_chunks = merge(batches)
        result.per_source = group_by_source(result.context_chunks)
        return result

    def _fan_out(self, subquery: str, sources: List[SourceScore], k: int,
                 constraints: Constraints, result: RetrievalResult) -> List[ScoredChunk]:
        def fetch(src: SourceScore):
            try:
                return src, self.query_source(src.endpoint, subquery, k, constraints, result.ledger), None
            except RetrievalError as e:
                return src, [], e

        batches = []
        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            for src, scored, error in pool.map(fetch, sources):
                if error is not None:
                    logger.warning("source %s failed: %s", src.source_id, error)
                    result.failed_sources[src.source_id] = str(error)
                    continue
                batches.append(scored)
        return merge(batches)

    def _decentralized_batches(self, pq: ProcessedQuery, s: int, k: int, resolver: str,
                               constraints: Constraints, result: RetrievalResult) -> List[List[ScoredChunk]]:
        if s < 1 or k < 1:
            raise ParameterError(f"s and k must be >= 1, got s={s} k={k}")
        batches = []
        for subquery in pq.subqueries:
            sources = self.resolve(resolver, subquery, s, constraints, result.ledger)
            batches.append(self._fan_out(subquery, sources, k, constraints, result))
        return batches

    def retrieve_decentralized(self, pq: ProcessedQuery, s: int, k: int, resolver: str,
                               constraints: Constraints = Constraints()) -> RetrievalResult:
        """
        Resolve s sources per subquery, fetch k chunks from each, re-rank globally.

        A failing source is recorded in failed_sources and skipped.

        Raises:
            RetrievalError: the resolver is unreachable or failing
        """
        result = RetrievalResult(mode="decentralized")
        batches = self._decentralized_batches(pq, s, k, resolver, constraints, result)
        result.context_chunks = merge(batches)
        result.per_source = group_by_source(result.context_chunks)
        return result

    def retrieve_hybrid(self, pq: ProcessedQuery, s_wide: int, k_wide: int, k_final: int,
                        resolver: str, constraints: Constraints = Constraints()) -> RetrievalResult:
        """
        Wide decentralized fetch, client-side constraint filter, then the
        top k_final per subquery. The ledger reflects the wide fetch.
        """
        if not 1 <= k_final <= s_wide * k_wide:
            raise ParameterError(f"k_final must be in [1, s_wide*k_wide], got {k_final}")
        result = RetrievalResult(mode="hybrid")
        wide = self._decentralized_batches(pq, s_wide, k_wide, resolver, constraints, result)

        now = self.clock()
        kept = []
        for batch in wide:
            admitted = [sc for sc in batch if constraints.admits_chunk(sc.chunk, now)]
            kept.append(admitted[:k_final])
        result.context_chunks = merge(kept)
        result.per_source = group_by_source(result.context_chunks)
        return result

    def retrieve_full_context(self, item: QaItem, documents: Dict[str, Document],
                              budget_tokens: int = DEFAULT_BUDGET_TOKENS) -> RetrievalResult:
        """
        Whole documents in search-rank order up to budget_tokens.

        Context entries span whole documents, are kept in rank order and
        carry score 1.0.
        """
        result = RetrievalResult(mode="full_context")
        for doc in full_context_documents(item, documents, budget_tokens, self.chars_per_token):
            chunk = Chunk(
                chunk_id=Chunk.make_id(doc.doc_id, 0, len(doc.text)),
                doc_id=doc.doc_id,
                source_id=doc.source_id,
                start=0,
                end=len(doc.text),
                text=doc.text,
                digest=text_digest(doc.text),
                uri=doc.uri,
                media_type=doc.media_type.value,
                fetched_at=doc.fetched_at,
            )
            result.context_chunks.append(ScoredChunk(chunk=chunk, score=1.0))
            result.included_docs.append(doc.doc_id)
            result.ledger.add_baseline(utf8_len(doc.text))
        result.per_source = group_by_source(result.context_chunks)
        return result
