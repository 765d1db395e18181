"""
Corpus loading and document normalization.

- sources.jsonl / questions.jsonl / docs/ readers
- HTML, markdown and plain-text normalization
- deterministic fixture generator
"""

from .normalize import MediaType, normalize_document
from .loader import (
    Document,
    QaItem,
    SourceInfo,
    documents_by_source,
    load_catalog,
    load_corpus,
)
from .fixtures import FixtureManifest, write_fixture_corpus

__all__ = ['MediaType', 'normalize_document', 'Document', 'QaItem', 'SourceInfo', 'documents_by_source', 'load_catalog', 'load_corpus', 'FixtureManifest', 'write_fixture_corpus']
