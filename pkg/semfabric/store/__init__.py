"""
Exact top-k vector index with JSON-lines persistence.
"""

from .vector_index import INDEX_VERSION, SUMMARY_LIMIT, ScoredChunk, VectorIndex

__all__ = ['INDEX_VERSION', 'SUMMARY_LIMIT', 'ScoredChunk', 'VectorIndex']
