"""Answer-containment oracle for context sufficiency."""

import re
from typing import List

_NON_WORD = re.compile(r"[^\w\s]|_")
_WHITESPACE = re.compile(r"\s+")


def normalize_answer(text: str) -> str:
    """Lowercase, punctuation to space, whitespace collapsed and trimmed."""
    return _WHITESPACE.sub(" ", _NON_WORD.sub(" ", text.lower())).strip()


def sufficiency(context_texts: List[str], answer_aliases: List[str]) -> bool:
    """True iff some normalized alias is a substring of the normalized context."""
    haystack = normalize_answer(" ".join(context_texts))
    if not haystack:
        return False
    for alias in answer_aliases:
        needle = normalize_answer(alias)
        if needle and needle in haystack:
            return True
    return False
