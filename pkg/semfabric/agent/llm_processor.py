"""
LLM-backed query processor.

Asks a Claude model to rephrase and decompose a query that has already been
scrubbed of PII locally. Any failure (missing package or key, API error,
unparseable reply) falls back to the rule engine, so callers always get a
ProcessedQuery.
"""

import json
import logging
import os
import re
from typing import List, Optional

from .query_processor import ProcessedQuery, QueryFlags, process_query, scrub_pii

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "claude-sonnet-4-5"

PROMPT = """You prepare search queries for a semantic retrieval system.

Rephrase the query below to remove ambiguity and optimize it for search.
If it asks several things, decompose it into individual, simpler questions.
Reply with JSON only, in the form:
{{"rephrased": "<query>", "subqueries": ["<question>", ...]}}

Query: {query}
"""

_JSON_OBJECT = re.compile(r"\{.*\}", re.DOTALL)


class LLMQueryProcessor:
    """Callable query-processor hook backed by the Anthropic API."""

    def __init__(self, model: str = DEFAULT_MODEL, api_key: Optional[str] = None,
                 max_tokens: int = 512, client=None):
        """
        Args:
            model: Claude model name
            api_key: API key (defaults to ANTHROPIC_API_KEY)
            max_tokens: Reply token limit
            client: Pre-built anthropic client (tests inject a stub)
        """
        self.model = model
        self.max_tokens = max_tokens
        self._client = client
        self._api_key = api_key or os.environ.get("ANTHROPIC_API_KEY")
        self.fallbacks = 0

    def _get_client(self):
        if self._client is None:
            import anthropic
            self._client = anthropic.Anthropic(api_key=self._api_key)
        return self._client

    def _ask(self, scrubbed: str) -> dict:
        reply = self._get_client().messages.create(
            model=self.model,
            max_tokens=self.max_tokens,
            messages=[{"role": "user", "content": PROMPT.format(query=scrubbed)}],
        )
        text = "".join(getattr(block, "text", "") for block in reply.content)
        match = _JSON_OBJECT.search(text)
        if not match:
            raise ValueError("reply contains no JSON object")
        return json.loads(match.group(0))

    def __call__(self, query: str) -> ProcessedQuery:
        scrubbed, pii = scrub_pii(query)
        try:
            data = self._ask(scrubbed)
            rephrased = str(data["rephrased"]).strip()
            subqueries: List[str] = [str(q).strip() for q in data.get("subqueries", []) if str(q).strip()]
            if not rephrased:
                raise ValueError("empty rephrasing")
        except Exception as e:
            self.fallbacks += 1
            logger.warning("LLM query processing failed, using rule engine: %s", e)
            return process_query(query)

        # scrub again: the model may echo PII-shaped text
        rephrased, _ = scrub_pii(rephrased)
        subqueries = [scrub_pii(q)[0] for q in subqueries] or [rephrased]
        return ProcessedQuery(
            original=query,
            scrubbed=scrubbed,
            rephrased=rephrased,
            subqueries=subqueries,
            flags=QueryFlags(
                was_rephrased=rephrased != scrubbed,
                was_decomposed=len(subqueries) > 1,
                pii_removed=pii,
            ),
        )
