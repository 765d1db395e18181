"""
Deterministic hashed character n-gram embeddings.

Each n-gram of the normalized text is hashed with 64-bit FNV-1a into one of
`dim` buckets; bucket counts are damped with ln(1 + count) and the vector is
L2-normalized. Cosine similarity is a dot product over float64 copies of the
stored float32 values, computed by one shared kernel so that single-pair
scoring and index scans agree bit for bit.
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Protocol, runtime_checkable

import numpy as np

from ..digest import fnv1a_64
from ..errors import ComparisonError, ParameterError

DEFAULT_MODEL_ID = "hash3-fnv1a-256-v1"

_WHITESPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class EmbedderSpec:
    """Embedder identity and shape."""
    model_id: str = DEFAULT_MODEL_ID
    dim: int = 256
    ngram: int = 3

    def validate(self):
        if self.dim < 16:
            raise ParameterError(f"dim must be >= 16, got {self.dim}")
        if self.ngram < 1:
            raise ParameterError(f"ngram must be >= 1, got {self.ngram}")

    def to_dict(self) -> Dict:
        return {"model_id": self.model_id, "dim": self.dim, "ngram": self.ngram}

    @staticmethod
    def from_dict(data: Dict) -> 'EmbedderSpec':
        return EmbedderSpec(model_id=data["model_id"], dim=int(data["dim"]), ngram=int(data.get("ngram", 3)))


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """Fixed-dimension float32 vector tagged with its model."""
    model_id: str
    values: np.ndarray  # float32, shape (dim,)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_zero(self) -> bool:
        return not self.values.any()

    def to_list(self) -> List[float]:
        return [float(v) for v in self.values]

    @staticmethod
    def from_list(model_id: str, values: List[float]) -> 'EmbeddingVector':
        return EmbeddingVector(model_id=model_id, values=np.asarray(values, dtype=np.float32))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return (self.model_id == other.model_id
                and self.values.shape == other.values.shape
                and self.values.tobytes() == other.values.tobytes())


@runtime_checkable
class Embedder(Protocol):
    """Anything that turns text into a model-tagged vector."""
    model_id: str
    dim: int

    def embed(self, text: str) -> EmbeddingVector:
        ...


def normalize_for_embedding(text: str) -> str:
    """Lowercase, collapse whitespace runs to one space, trim."""
    return _WHITESPACE.sub(" ", text.lower()).strip()


def embed(text: str, spec: EmbedderSpec = EmbedderSpec()) -> EmbeddingVector:
    """Embed text with the hashed n-gram scheme described by spec."""
    spec.validate()
    norm = normalize_for_embedding(text)
    counts = np.zeros(spec.dim, dtype=np.float64)
    n = spec.ngram
    for i in range(len(norm) - n + 1):
        bucket = fnv1a_64(norm[i:i + n].encode("utf-8")) % spec.dim
        counts[bucket] += 1.0

    weights = np.log1p(counts)
    norm2 = float(np.sqrt(np.dot(weights, weights)))
    if norm2 > 0.0:
        weights = weights / norm2
    return EmbeddingVector(model_id=spec.model_id, values=weights.astype(np.float32))


class HashingEmbedder:
    """Default Embedder implementation."""

    def __init__(self, spec: EmbedderSpec = EmbedderSpec()):
        spec.validate()
        self.spec = spec
        self.model_id = spec.model_id
        self.dim = spec.dim

    def embed(self, text: str) -> EmbeddingVector:
        return embed(text, self.spec)


def check_compatible(model_id: str, dim: int, other_model: str, other_dim: int):
    if model_id != other_model or dim != other_dim:
        raise ComparisonError(model_id, other_model, dim, other_dim)


def score_rows(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row-wise dot products in float64 (matrix: (n, dim) float32)."""
    if matrix.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    return (matrix.astype(np.float64) * query.astype(np.float64)).sum(axis=1)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine of two unit (or zero) vectors; 0.0 when either is zero."""
    check_compatible(a.model_id, a.dim, b.model_id, b.dim)
    if a.is_zero or b.is_zero:
        return 0.0
    return float(score_rows(a.values.reshape(1, -1), b.values)[0])
