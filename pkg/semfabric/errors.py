"""Exception hierarchy for semfabric."""

from typing import List, Optional


class SemfabricError(Exception):
    """Root of every error raised by semfabric."""


class CorpusError(SemfabricError):
    """Corpus directory could not be loaded."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path:
            where = f" ({path}" + (f":{line}" if line is not None else "") + ")"
        super().__init__(message + where)


class ParameterError(SemfabricError, ValueError):
    """Invalid parameter value (split params, embedder spec, k, s)."""


class ComparisonError(SemfabricError):
    """Vectors from different embedding models or dimensions were compared."""

    def __init__(self, left_model: str, right_model: str, left_dim: int, right_dim: int):
        self.left_model = left_model
        self.right_model = right_model
        super().__init__(
            f"cannot compare {left_model} (dim {left_dim}) with {right_model} (dim {right_dim})"
        )


class IndexLoadError(SemfabricError):
    """Index file is corrupt, truncated or of an unsupported version."""

    def __init__(self, reason: str, path: Optional[str] = None):
        self.reason = reason
        self.path = path
        target = f"index {path}" if path else "index"
        super().__init__(f"cannot load {target}: {reason}")


class IngestionError(SemfabricError):
    """Documents handed to ingestion do not form a single source."""


class RetrievalError(SemfabricError):
    """Transport failure while talking to a resolver or source."""

    def __init__(self, endpoint: str, detail: str):
        self.endpoint = endpoint
        self.detail = detail
        super().__init__(f"{endpoint}: {detail}")


class ConfigError(SemfabricError):
    """Experiment configuration is missing or malformed."""


class ReportError(SemfabricError):
    """Report requested over an empty row set."""


class InputError(SemfabricError, ValueError):
    """Query text is empty or otherwise unusable."""


class ValidationFailed(SemfabricError):
    """Wire payload failed validation; carries the offending field names."""

    def __init__(self, message: str, fields: Optional[List[str]] = None):
        self.fields = fields or []
        super().__init__(message)
