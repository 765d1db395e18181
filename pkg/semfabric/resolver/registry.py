"""
Source registry for the semantic resolver.

Registrations are keyed by source_id. The resolver embeds each manifest's
summary_text with its own embedder, so sources may use any embedding model
for their chunks.
"""

import json
import logging
import threading
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from ..embed import EmbeddingVector, HashingEmbedder, score_rows
from ..errors import ParameterError
from ..wire import Constraints, SourceManifest, format_timestamp

logger = logging.getLogger(__name__)

Clock = Callable[[], datetime]


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class Registration:
    """A registered source and the resolver-side vector of its summary."""
    manifest: SourceManifest
    source_vec: EmbeddingVector
    registered_at: str

    def to_dict(self) -> Dict:
        return {
            "manifest": self.manifest.to_dict(),
            "registered_at": self.registered_at,
        }


@dataclass
class SourceScore:
    """One ranked source, with the signals it was admitted on."""
    source_id: str
    endpoint: str
    score: float
    license: str
    topics: List[str]
    updated_at: str

    def to_dict(self) -> Dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict) -> 'SourceScore':
        return SourceScore(
            source_id=data["source_id"],
            endpoint=data["endpoint"],
            score=float(data["score"]),
            license=data.get("license", ""),
            topics=list(data.get("topics", [])),
            updated_at=data.get("updated_at", ""),
        )


@dataclass
class Resolution:
    """Result of a resolve call."""
    results: List[SourceScore]
    filtered_out: int

    def to_dict(self) -> Dict:
        return {"results": [r.to_dict() for r in self.results], "filtered_out": self.filtered_out}


class Registry:
    """
    Flat registry of source manifests.

    register() swaps in a new dict under the lock; resolve() works on the
    dict it read, so it sees either the old or the new registration.
    """

    def __init__(self, embedder: Optional[HashingEmbedder] = None,
                 state_path: Optional[Path] = None, clock: Clock = _utcnow):
        """
        Args:
            embedder: Resolver-side embedder for summary_text and queries
            state_path: Optional JSONL file the registry is saved to after each change
            clock: Source of "now" for registration times and freshness checks
        """
        self.embedder = embedder or HashingEmbedder()
        self.state_path = Path(state_path) if state_path else None
        self.clock = clock
        self._lock = threading.Lock()
        self._registrations: Dict[str, Registration] = {}

        if self.state_path and self.state_path.exists():
            self._load_state()

    def __len__(self) -> int:
        return len(self._registrations)

    def register(self, manifest: SourceManifest) -> Registration:
        """Add or replace the registration for manifest.source_id."""
        reg = Registration(
            manifest=manifest,
            source_vec=self.embedder.embed(manifest.summary_text),
            registered_at=format_timestamp(self.clock()),
        )
        with self._lock:
            replaced = manifest.source_id in self._registrations
            updated = dict(self._registrations)
            updated[manifest.source_id] = reg
            self._registrations = updated
            self._save_state()
        logger.info("%s source %s at %s", "re-registered" if replaced else "registered",
                    manifest.source_id, manifest.endpoint)
        return reg

    def deregister(self, source_id: str) -> bool:
        with self._lock:
            if source_id not in self._registrations:
                return False
            updated = dict(self._registrations)
            del updated[source_id]
            self._registrations = updated
            self._save_state()
        logger.info("deregistered source %s", source_id)
        return True

    def list_sources(self) -> List[Registration]:
        regs = self._registrations
        return [regs[sid] for sid in sorted(regs)]

    def resolve(self, query: str, s: int, constraints: Constraints = Constraints(),
                now: Optional[datetime] = None) -> Resolution:
        """
        Rank registered sources for a query.

        Args:
            query: Query text, embedded with the resolver's embedder
            s: Number of sources to return (>= 1)
            constraints: Source-level scope
            now: Reference time for max_age_days (defaults to the clock)

        Returns:
            Resolution sorted by (score desc, source_id asc)
        """
        if s < 1:
            raise ParameterError(f"s must be >= 1, got {s}")
        now = now or self.clock()
        regs = self.list_sources()
        admitted = [r for r in regs if constraints.admits_manifest(r.manifest, now)]
        filtered_out = len(regs) - len(admitted)
        if not admitted:
            return Resolution(results=[], filtered_out=filtered_out)

        query_vec = self.embedder.embed(query)
        if query_vec.is_zero:
            scores = np.zeros(len(admitted), dtype=np.float64)
        else:
            # a zero summary vector scores 0.0, matching cosine()
            matrix = np.vstack([r.source_vec.values for r in admitted])
            scores = score_rows(matrix, query_vec.values)

        # admitted is in source_id order, so the stable sort keeps the tie rule
        ranked = np.argsort(-scores, kind="stable")[:s]
        results = []
        for i in ranked:
            m = admitted[i].manifest
            results.append(SourceScore(
                source_id=m.source_id,
                endpoint=m.endpoint,
                score=float(scores[i]),
                license=m.license,
                topics=list(m.topics),
                updated_at=m.updated_at,
            ))
        return Resolution(results=results, filtered_out=filtered_out)

    # --- state -------------------------------------------------------------

    def _save_state(self):
        if not self.state_path:
            return
        self.state_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.state_path.with_suffix(self.state_path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            for sid in sorted(self._registrations):
                f.write(json.dumps(self._registrations[sid].to_dict(), sort_keys=True) + "\n")
        tmp.replace(self.state_path)

    def _load_state(self):
        loaded = {}
        with open(self.state_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                    manifest = SourceManifest.from_dict(data["manifest"])
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    logger.warning("skipping registry state line %d: %s", lineno, e)
                    continue
                loaded[manifest.source_id] = Registration(
                    manifest=manifest,
                    source_vec=self.embedder.embed(manifest.summary_text),
                    registered_at=data.get("registered_at", ""),
                )
        self._registrations = loaded
        logger.info("restored %d registrations from %s", len(loaded), self.state_path)
