"""
Deterministic text embeddings and cosine scoring.
"""

from .hashing_embedder import (
    DEFAULT_MODEL_ID,
    Embedder,
    EmbedderSpec,
    EmbeddingVector,
    HashingEmbedder,
    check_compatible,
    cosine,
    embed,
    normalize_for_embedding,
    score_rows,
)

__all__ = ['DEFAULT_MODEL_ID', 'Embedder', 'EmbedderSpec', 'EmbeddingVector', 'HashingEmbedder', 'check_compatible', 'cosine', 'embed', 'normalize_for_embedding', 'score_rows']
