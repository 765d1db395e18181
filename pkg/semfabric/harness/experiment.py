"""
Experiment runner.

For every question: process the query, retrieve with the configured mode,
compute the full-context baseline for the same question, judge sufficiency,
and emit one ExperimentRow. Rows come back in canonical (qid, mode, s, k, k_final,
budget) order whatever order the questions finished in.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict, fields
from pathlib import Path
from typing import Dict, List, Optional

from ..agent import (
    AgentClient,
    QueryProcessor,
    RetrievalResult,
    full_context_documents,
    process_query,
)
from ..corpus import Document, QaItem, load_corpus
from ..digest import utf8_len
from ..errors import ConfigError
from .config import ExperimentConfig, GridConfig, Mode
from .fabric import CENTRAL_URL, RESOLVER_URL, LocalFabric
from .sufficiency import sufficiency

logger = logging.getLogger(__name__)

K_SEMANTICS = "per_subquery"


@dataclass
class ExperimentRow:
    """Outcome of one question under one configuration."""
    qid: str
    mode: str
    s: Optional[int]
    k: Optional[int]
    k_final: Optional[int]
    budget_tokens: int
    chunks_retrieved: int
    bytes_transferred: int
    baseline_bytes: int
    transfer_fraction: Optional[float]
    sufficient: bool
    was_rephrased: bool
    was_decomposed: bool
    pii_removed: bool
    failed_sources: int

    def to_dict(self) -> Dict:
        return asdict(self)

    @staticmethod
    def field_names() -> List[str]:
        return [f.name for f in fields(ExperimentRow)]

    def sort_key(self):
        def n(v):
            return -1 if v is None else v
        return (self.qid, self.mode, n(self.s), n(self.k), n(self.k_final), self.budget_tokens)


class Experiment:
    """Runs configurations against one corpus through one AgentClient."""

    def __init__(
        self,
        agent: AgentClient,
        documents: List[Document],
        questions: List[QaItem],
        resolver: Optional[str] = None,
        central: Optional[str] = None,
        query_hook: Optional[QueryProcessor] = None,
    ):
        self.agent = agent
        self.documents = {d.doc_id: d for d in documents}
        self.questions = questions
        self.resolver = resolver
        self.central = central
        self.query_hook = query_hook
        self._source_count: Optional[int] = None

    def _resolve_s(self, cfg: ExperimentConfig) -> Optional[int]:
        if not cfg.s_all:
            return cfg.s
        if self._source_count is None:
            self._source_count = self.agent.source_count(cfg.resolver or self.resolver)
        return self._source_count

    def _retrieve(self, cfg: ExperimentConfig, item: QaItem, pq, s: Optional[int]) -> RetrievalResult:
        resolver = cfg.resolver or self.resolver
        central = cfg.central or self.central
        if cfg.mode is Mode.CENTRALIZED:
            return self.agent.retrieve_centralized(pq, cfg.k, central, cfg.constraints)
        if cfg.mode is Mode.DECENTRALIZED:
            return self.agent.retrieve_decentralized(pq, s, cfg.k, resolver, cfg.constraints)
        if cfg.mode is Mode.HYBRID:
            return self.agent.retrieve_hybrid(pq, s, cfg.k, cfg.k_final, resolver, cfg.constraints)
        return self.agent.retrieve_full_context(item, self.documents, cfg.budget_tokens)

    def baseline_bytes(self, item: QaItem, budget_tokens: int, chars_per_token: int) -> int:
        docs = full_context_documents(item, self.documents, budget_tokens, chars_per_token)
        return sum(utf8_len(d.text) for d in docs)

    def run_item(self, cfg: ExperimentConfig, item: QaItem, s: Optional[int]) -> ExperimentRow:
        pq = process_query(item.question, self.query_hook)
        result = self._retrieve(cfg, item, pq, s)
        baseline = self.baseline_bytes(item, cfg.budget_tokens, cfg.chars_per_token)
        if cfg.mode is Mode.FULL_CONTEXT:
            moved = result.ledger.baseline_bytes
        else:
            moved = result.ledger.transferred
        return ExperimentRow(
            qid=item.qid,
            mode=cfg.mode.value,
            s=s,
            k=cfg.k,
            k_final=cfg.k_final,
            budget_tokens=cfg.budget_tokens,
            chunks_retrieved=len(result.context_chunks),
            bytes_transferred=moved,
            baseline_bytes=baseline,
            transfer_fraction=moved / baseline if baseline > 0 else None,
            sufficient=sufficiency(result.context_texts, item.answer_aliases),
            was_rephrased=pq.flags.was_rephrased,
            was_decomposed=pq.flags.was_decomposed,
            pii_removed=pq.flags.pii_removed,
            failed_sources=len(result.failed_sources),
        )

    def run(self, cfg: ExperimentConfig) -> List[ExperimentRow]:
        """
        Rows for every question under cfg.

        Raises:
            RetrievalError: the resolver or central source is unreachable
        """
        s = self._resolve_s(cfg) if cfg.mode in (Mode.DECENTRALIZED, Mode.HYBRID) else None
        logger.info("running %s over %d questions", cfg.label, len(self.questions))
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            rows = list(pool.map(lambda item: self.run_item(cfg, item, s), self.questions))
        for row in rows:
            if row.failed_sources:
                logger.warning("%s: %d source(s) failed under %s", row.qid, row.failed_sources, cfg.label)
        return sorted(rows, key=ExperimentRow.sort_key)


def run_experiment(cfg: ExperimentConfig, agent: Optional[AgentClient] = None,
                   fabric: Optional[LocalFabric] = None) -> List[ExperimentRow]:
    """
    Run one configuration.

    With a fabric the in-process endpoints are used; otherwise cfg.resolver
    and cfg.central must point at running services.
    """
    return run_grid([cfg], agent=agent, fabric=fabric)


def run_grid(configs: List[ExperimentConfig], agent: Optional[AgentClient] = None,
             fabric: Optional[LocalFabric] = None,
             query_hook: Optional[QueryProcessor] = None) -> List[ExperimentRow]:
    """Run several configurations and return all rows in canonical order."""
    if not configs:
        return []
    if fabric is not None:
        documents, questions = fabric.documents, fabric.questions
        agent = agent or fabric.agent(configs[0].parallelism, configs[0].chars_per_token)
        experiment = Experiment(agent, documents, questions, RESOLVER_URL, CENTRAL_URL, query_hook)
    else:
        corpus = configs[0].corpus_path
        if corpus is None:
            raise ConfigError("config needs a corpus path")
        documents, questions = load_corpus(corpus)
        agent = agent or AgentClient(parallelism=configs[0].parallelism,
                                     chars_per_token=configs[0].chars_per_token)
        experiment = Experiment(agent, documents, questions, query_hook=query_hook)

    rows: List[ExperimentRow] = []
    for cfg in configs:
        rows.extend(experiment.run(cfg))
    return sorted(rows, key=ExperimentRow.sort_key)


def run_config_file(grid: GridConfig, query_hook: Optional[QueryProcessor] = None) -> List[ExperimentRow]:
    """Expand a parsed config file and run it, in process when configured."""
    configs = grid.expand()
    if grid.in_process:
        if grid.corpus_path is None:
            raise ConfigError("in_process runs need a corpus path")
        with LocalFabric(grid.corpus_path) as fabric:
            return run_grid(configs, fabric=fabric, query_hook=query_hook)
    return run_grid(configs, query_hook=query_hook)


def write_metadata(path: Path, grid: Optional[GridConfig] = None) -> Path:
    """metadata.json recording how k is applied to decomposed questions."""
    meta = {
        "k_semantics": K_SEMANTICS,
        "row_fields": ExperimentRow.field_names(),
    }
    if grid is not None:
        meta["modes"] = [m.value for m in grid.modes]
        meta["in_process"] = grid.in_process
        meta["constraints"] = grid.constraints.to_dict()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
