"""
Agent client: query processing, retrieval strategies and bandwidth accounting.
"""

from .query_processor import (
    ProcessedQuery,
    QueryFlags,
    QueryProcessor,
    decompose,
    process_query,
    rephrase,
    scrub_pii,
)
from .llm_processor import LLMQueryProcessor
from .ledger import BandwidthLedger, estimate_tokens
from .retriever import (
    DEFAULT_BUDGET_TOKENS,
    AgentClient,
    RetrievalResult,
    full_context_documents,
    group_by_source,
    merge,
)

__all__ = ['ProcessedQuery', 'QueryFlags', 'QueryProcessor', 'decompose', 'process_query', 'rephrase', 'scrub_pii', 'LLMQueryProcessor', 'BandwidthLedger', 'estimate_tokens', 'DEFAULT_BUDGET_TOKENS', 'AgentClient', 'RetrievalResult', 'full_context_documents', 'group_by_source', 'merge']
