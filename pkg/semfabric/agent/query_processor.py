"""
Deterministic query processing: PII scrubbing, rephrasing, decomposition.

The rule engine is the default. Any callable with the signature of
process_query can be passed as a hook to replace it (see llm_processor).
"""

import re
from dataclasses import dataclass, field, asdict
from typing import Callable, Dict, List, Optional, Tuple

from ..errors import InputError

# Card-like numbers go first so phone patterns never eat part of one.
_PII_PATTERNS: List[Tuple[re.Pattern, str]] = [
    (re.compile(r"\b(?:\d[ -]?){15}\d\b"), "[NUMBER]"),
    (re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}"), "[EMAIL]"),
    (re.compile(r"\+\d{1,3}[ .-]?\(?\d{1,4}\)?(?:[ .-]?\d{2,4}){1,4}\b"), "[PHONE]"),
    (re.compile(r"\(\d{3}\)\s?\d{3}[ .-]?\d{4}\b"), "[PHONE]"),
    (re.compile(r"\b\d{3}[ .-]\d{3}[ .-]\d{4}\b"), "[PHONE]"),
]

_WHITESPACE = re.compile(r"\s+")
_POLITE_PREFIX = re.compile(r"^please\s+", re.IGNORECASE)
_REPEATED_QMARK = re.compile(r"\?(?:\s*\?)+\s*$")
_AND = re.compile(r"\s+and\s+", re.IGNORECASE)
_SENTENCE_Q = re.compile(r"[^?]+\?|[^?]+$")

INTERROGATIVES = frozenset({
    "who", "whom", "whose", "what", "when", "where", "which", "why", "how",
})


@dataclass
class QueryFlags:
    was_rephrased: bool = False
    was_decomposed: bool = False
    pii_removed: bool = False

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class ProcessedQuery:
    """A query after scrubbing, rephrasing and decomposition."""
    original: str
    scrubbed: str
    rephrased: str
    subqueries: List[str]
    flags: QueryFlags = field(default_factory=QueryFlags)

    @property
    def category(self) -> str:
        """decomposed, rephrased or unchanged (decomposition wins)."""
        if self.flags.was_decomposed:
            return "decomposed"
        if self.flags.was_rephrased:
            return "rephrased"
        return "unchanged"

    def to_dict(self) -> Dict:
        d = asdict(self)
        d["flags"] = self.flags.to_dict()
        return d


QueryProcessor = Callable[[str], ProcessedQuery]


def scrub_pii(text: str) -> Tuple[str, bool]:
    """
    Replace emails, phone numbers and card-like numbers with placeholders.

    Returns:
        (scrubbed text, whether anything was replaced)
    """
    replaced = False
    for pattern, placeholder in _PII_PATTERNS:
        text, n = pattern.subn(placeholder, text)
        replaced = replaced or n > 0
    return text, replaced


def rephrase(text: str) -> str:
    """Collapse whitespace, drop a leading "please", squash repeated '?'."""
    out = _WHITESPACE.sub(" ", text).strip()
    out = _POLITE_PREFIX.sub("", out)
    out = _REPEATED_QMARK.sub("?", out)
    return out.strip()


def _depth_zero(text: str, pos: int) -> bool:
    prefix = text[:pos]
    return prefix.count("(") == prefix.count(")") and prefix.count('"') % 2 == 0


def _is_interrogative(clause: str) -> bool:
    words = clause.split(maxsplit=1)
    return bool(words) and words[0].lower().strip("\"'(") in INTERROGATIVES


def _split_conjunction(sentence: str) -> List[str]:
    for m in _AND.finditer(sentence):
        left, right = sentence[:m.start()].strip(), sentence[m.end():].strip()
        if _depth_zero(sentence, m.start()) and _is_interrogative(left) and _is_interrogative(right):
            if not left.endswith("?"):
                left += "?"
            return [left] + _split_conjunction(right)
    return [sentence]


def decompose(text: str) -> List[str]:
    """
    Split a compound question into simpler ones.

    Splits at sentence-final '?' when there are two or more questions, and
    at a top-level " and " that joins two interrogative clauses.
    """
    sentences = [s.strip() for s in _SENTENCE_Q.findall(text) if s.strip()]
    if sum(1 for s in sentences if s.endswith("?")) < 2:
        sentences = [text.strip()] if text.strip() else []
    parts: List[str] = []
    for sentence in sentences:
        parts.extend(p for p in _split_conjunction(sentence) if p.strip())
    return parts or [text.strip()]


def process_query(query: str, hook: Optional[QueryProcessor] = None) -> ProcessedQuery:
    """
    Scrub, rephrase and decompose a query.

    Args:
        query: Raw user question
        hook: Optional replacement processor with the same signature

    Raises:
        InputError: query is empty after trimming
    """
    if not query or not query.strip():
        raise InputError("query is empty")
    if hook is not None:
        return hook(query)

    scrubbed, pii = scrub_pii(query)
    rephrased = rephrase(scrubbed)
    subqueries = decompose(rephrased)
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
