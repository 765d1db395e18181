"""
Wire types shared by sources, the resolver and the agent.

Domain records are dataclasses with to_dict/from_dict; inbound HTTP bodies
are validated with pydantic models and converted to the dataclasses.
Bodies are rendered as canonical JSON so identical payloads are identical
bytes.
"""

import json
from dataclasses import dataclass, field, asdict
from datetime import datetime, timedelta, timezone
from typing import Any, Dict, List, Optional

from pydantic import (
    AnyHttpUrl,
    BaseModel,
    ConfigDict,
    Field,
    StrictInt,
    TypeAdapter,
    ValidationError,
    field_validator,
)

from .digest import canonical_json
from .errors import ValidationFailed

PROTOCOL_VERSION = "1"
MAX_K = 1000
SUMMARY_LIMIT = 4096


def parse_timestamp(value: str) -> datetime:
    """ISO-8601 to aware UTC datetime; a trailing 'Z' is accepted."""
    if not isinstance(value, str):
        raise TypeError(f"timestamp must be a string, got {type(value).__name__}")
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _folded(values) -> set:
    return {v.casefold() for v in values}


@dataclass
class Constraints:
    """Retrieval scope: allowed licenses, topics, freshness and media types."""
    licenses: Optional[List[str]] = None
    topics: Optional[List[str]] = None
    max_age_days: Optional[int] = None
    media_types: Optional[List[str]] = None

    @property
    def empty(self) -> bool:
        return all(v is None for v in (self.licenses, self.topics, self.max_age_days, self.media_types))

    def to_dict(self) -> Dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @staticmethod
    def from_dict(data: Optional[Dict]) -> 'Constraints':
        if not data:
            return Constraints()
        return Constraints(
            licenses=data.get("licenses"),
            topics=data.get("topics"),
            max_age_days=data.get("max_age_days"),
            media_types=data.get("media_types"),
        )

    def license_ok(self, license_id: str) -> bool:
        return self.licenses is None or license_id.casefold() in _folded(self.licenses)

    def topics_ok(self, topics: List[str]) -> bool:
        return self.topics is None or bool(_folded(self.topics) & _folded(topics))

    def fresh(self, timestamp: str, now: datetime) -> bool:
        if self.max_age_days is None:
            return True
        if not timestamp:
            return False
        try:
            ts = parse_timestamp(timestamp)
        except (TypeError, ValueError):
            return False
        return now - ts <= timedelta(days=self.max_age_days)

    def media_ok(self, media_types: List[str]) -> bool:
        return self.media_types is None or bool(_folded(self.media_types) & _folded(media_types))

    def admits_manifest(self, manifest: 'SourceManifest', now: datetime) -> bool:
        """Source-level check used by the resolver."""
        return (self.license_ok(manifest.license)
                and self.topics_ok(manifest.topics)
                and self.fresh(manifest.updated_at, now)
                and self.media_ok(manifest.media_types))

    def admits_chunk(self, chunk, now: datetime, fallback_license: str = "") -> bool:
        """Chunk-level check (license, freshness, media type)."""
        return (self.license_ok(chunk.license or fallback_license)
                and self.fresh(chunk.fetched_at, now)
                and self.media_ok([chunk.media_type]))


@dataclass
class SourceManifest:
    """A source's self-description."""
    source_id: str
    endpoint: str
    title: str
    embedding_model_id: str
    license: str
    topics: List[str]
    chunk_count: int
    summary_text: str
    updated_at: str
    media_types: List[str] = field(default_factory=list)
    protocol_version: str = PROTOCOL_VERSION

    def to_dict(self) -> Dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict) -> 'SourceManifest':
        known = {k: data[k] for k in SourceManifest.__dataclass_fields__ if k in data}
        return SourceManifest(**known)


# --- inbound validation ----------------------------------------------------

class ConstraintsModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    licenses: Optional[List[str]] = None
    topics: Optional[List[str]] = None
    max_age_days: Optional[StrictInt] = Field(default=None, ge=0)
    media_types: Optional[List[str]] = None

    @field_validator("licenses", "topics", "media_types")
    @classmethod
    def _non_empty(cls, v):
        if v is not None and not v:
            raise ValueError("must be non-empty when present")
        return v


class QueryRequestModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    query: str
    k: StrictInt = Field(ge=1, le=MAX_K)
    constraints: Optional[ConstraintsModel] = None

    @field_validator("query")
    @classmethod
    def _query_present(cls, v):
        if not v.strip():
            raise ValueError("query must be non-empty")
        return v


class ResolveRequestModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    query: str
    s: StrictInt = Field(ge=1)
    constraints: Optional[ConstraintsModel] = None

    @field_validator("query")
    @classmethod
    def _query_present(cls, v):
        if not v.strip():
            raise ValueError("query must be non-empty")
        return v


class ManifestModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    protocol_version: str = PROTOCOL_VERSION
    source_id: str = Field(min_length=1)
    endpoint: str
    title: str
    embedding_model_id: str = Field(min_length=1)
    license: str = Field(min_length=1)
    topics: List[str]
    chunk_count: StrictInt = Field(ge=0)
    summary_text: str = Field(max_length=SUMMARY_LIMIT)
    updated_at: str
    media_types: List[str] = Field(default_factory=list)

    @field_validator("endpoint")
    @classmethod
    def _endpoint_url(cls, v):
        TypeAdapter(AnyHttpUrl).validate_python(v)
        return v

    @field_validator("updated_at")
    @classmethod
    def _timestamp(cls, v):
        try:
            parse_timestamp(v)
        except ValueError:
            raise ValueError("updated_at must be an ISO-8601 timestamp")
        return v


def parse_body(raw: bytes, model: type) -> BaseModel:
    """
    Decode a JSON body and validate it against a pydantic model.

    Raises:
        ValidationFailed with the failing field names
    """
    try:
        data = json.loads(raw.decode("utf-8")) if raw else None
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ValidationFailed("malformed_json")
    if not isinstance(data, dict):
        raise ValidationFailed("malformed_json")
    try:
        return model.model_validate(data)
    except ValidationError as e:
        fields = sorted({".".join(str(p) for p in err["loc"]) or "body" for err in e.errors()})
        raise ValidationFailed("invalid_request", fields=fields)


def constraints_from_model(model: Optional[ConstraintsModel]) -> Constraints:
    if model is None:
        return Constraints()
    return Constraints.from_dict(model.model_dump())


# --- rendering -------------------------------------------------------------

def render(payload: Any) -> bytes:
    return canonical_json(payload)


def render_sized(payload: Dict, size_field: str = "served_bytes") -> bytes:
    """
    Render payload with `size_field` equal to the byte length of the body
    that carries it.
    """
    size = 0
    while True:
        payload[size_field] = size
        body = canonical_json(payload)
        if len(body) == size:
            return body
        size = len(body)


def error_body(code: str, detail: Any = None, fields: Optional[List[str]] = None) -> bytes:
    payload: Dict[str, Any] = {"error": code}
    if detail is not None:
        payload["detail"] = detail
    if fields:
        payload["fields"] = fields
    return canonical_json(payload)
