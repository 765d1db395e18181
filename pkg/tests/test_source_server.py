"""Tests for ingestion and the source HTTP server."""

import json
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import pytest

from semfabric.corpus import Document, MediaType, SourceInfo
from semfabric.digest import text_digest
from semfabric.errors import IngestionError
from semfabric.source import (
    SourceServer,
    build_index,
    create_source_app,
    ingest_source,
    load_server,
)

NOW = datetime(2026, 1, 1, tzinfo=timezone.utc)


def _doc(doc_id, text, source_id="src-a", fetched_at="2025-12-01T00:00:00Z",
         media_type=MediaType.PLAIN):
    return Document(doc_id=doc_id, source_id=source_id, uri=f"https://a.example/{doc_id}",
                    media_type=media_type, text=text, raw_bytes_len=len(text),
                    fetched_at=fetched_at)


DOCS = [
    _doc("a1", "The harbour master keeps the tide tables.\n\n" * 40),
    _doc("a2", "Comet sightings were logged by the guild.\n\n" * 40),
]
INFO = SourceInfo(source_id="src-a", title="Harbour Records", license="cc-by-4.0",
                  topics=["maritime"])


def _client(index=None):
    if index is None:
        index = build_index(DOCS, info=INFO)
    server = SourceServer(index, "http://src-a.test", clock=lambda: NOW)
    return create_source_app(server).test_client()


def _query(client, body):
    return client.post("/query", data=json.dumps(body), content_type="application/json")


def test_manifest_describes_index():
    """Test the manifest."""
    client = _client()
    manifest = client.get("/manifest").get_json()
    assert manifest["source_id"] == "src-a"
    assert manifest["license"] == "cc-by-4.0"
    assert manifest["topics"] == ["maritime"]
    assert manifest["media_types"] == ["plain"]
    assert manifest["updated_at"] == "2025-12-01T00:00:00Z"
    assert manifest["chunk_count"] > 0


def test_empty_source_manifest():
    """Test the manifest of an empty source."""
    client = _client(build_index([], info=SourceInfo.default("empty")))
    manifest = client.get("/manifest").get_json()
    assert manifest["chunk_count"] == 0
    assert manifest["summary_text"] == ""


def test_query_returns_k_results_with_provenance():
    """Test query results carry provenance."""
    client = _client()
    resp = _query(client, {"query": "tide tables", "k": 3})
    assert resp.status_code == 200
    body = resp.get_json()
    assert len(body["results"]) == 3
    top = body["results"][0]
    assert top["doc_id"] == "a1"
    assert top["digest"] == text_digest(top["text"])
    assert top["license"] == "cc-by-4.0"
    assert top["uri"] == "https://a.example/a1"
    scores = [r["score"] for r in body["results"]]
    assert scores == sorted(scores, reverse=True)


def test_served_bytes_is_exact():
    """Test served_bytes equals the body length."""
    client = _client()
    resp = _query(client, {"query": "comet guild", "k": 5})
    assert resp.get_json()["served_bytes"] == len(resp.data)


def test_k_larger_than_index():
    """Test k above the index size."""
    index = build_index(DOCS, info=INFO)
    client = _client(index)
    body = _query(client, {"query": "tide", "k": 1000}).get_json()
    assert len(body["results"]) == len(index)


@pytest.mark.parametrize("body", [
    {"query": "tide", "k": 0},
    {"query": "tide", "k": 1001},
    {"query": "tide", "k": "5"},
    {"query": "   ", "k": 5},
    {"k": 5},
    {"query": "tide"},
])
def test_invalid_requests_are_400(body):
    """Test invalid query requests."""
    resp = _query(_client(), body)
    assert resp.status_code == 400
    payload = resp.get_json()
    assert payload["error"] == "invalid_request"
    assert payload["fields"]


def test_malformed_json_is_400():
    """Test a malformed JSON body."""
    resp = _client().post("/query", data=b"{not json", content_type="application/json")
    assert resp.status_code == 400
    assert resp.get_json()["error"] == "malformed_json"


def test_unloaded_index_is_503():
    """Test a server without an index."""
    client = create_source_app(SourceServer(None, "http://src-a.test")).test_client()
    assert _query(client, {"query": "tide", "k": 1}).status_code == 503
    assert client.get("/manifest").status_code == 503
    assert client.get("/healthz").get_json() == {"loaded": False, "status": "ok"}


def test_unknown_path_is_json_404():
    """Test unknown paths."""
    resp = _client().get("/nope")
    assert resp.status_code == 404
    assert resp.get_json()["error"] == "not_found"


def test_license_constraint_excludes_everything():
    """Test a license constraint no chunk satisfies."""
    resp = _query(_client(), {"query": "tide", "k": 5, "constraints": {"licenses": ["mit"]}})
    assert resp.status_code == 200
    assert resp.get_json()["results"] == []


def test_freshness_constraint():
    """Test the max_age_days constraint."""
    client = _client()
    fresh = _query(client, {"query": "tide", "k": 5, "constraints": {"max_age_days": 60}}).get_json()
    stale = _query(client, {"query": "tide", "k": 5, "constraints": {"max_age_days": 10}}).get_json()
    assert len(fresh["results"]) == 5
    assert stale["results"] == []


def test_responses_are_deterministic():
    """Test identical queries give identical bytes."""
    client = _client()
    first = _query(client, {"query": "harbour comet", "k": 10}).data
    second = _query(client, {"query": "harbour comet", "k": 10}).data
    assert first == second


def test_build_index_rejects_mixed_sources():
    """Test one index cannot mix two sources."""
    with pytest.raises(IngestionError):
        build_index([DOCS[0], _doc("b1", "text", source_id="src-b")])


def test_ingest_is_idempotent_and_loadable():
    """Test ingesting twice writes the same file."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "src-a.jsonl"
        first = ingest_source(DOCS, path, info=INFO).digest()
        bytes_one = path.read_bytes()
        second = ingest_source(DOCS, path, info=INFO).digest()
        assert first == second
        assert path.read_bytes() == bytes_one

        server = load_server(path, "http://src-a.test")
        assert server.loaded
        assert server.manifest().source_id == "src-a"


def test_load_server_with_broken_index():
    """Test serving a broken index file."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "broken.jsonl"
        path.write_bytes(b"{oops")
        assert not load_server(path, "http://src-a.test").loaded


def test_golden_bodies_for_empty_source():
    """Test empty-source bodies byte for byte."""
    client = _client(build_index([], info=SourceInfo.default("empty")))
    assert client.get("/manifest").data == (
        b'{"chunk_count":0,"embedding_model_id":"hash3-fnv1a-256-v1",'
        b'"endpoint":"http://src-a.test","license":"proprietary","media_types":[],'
        b'"protocol_version":"1","source_id":"empty","summary_text":"","title":"empty",'
        b'"topics":[],"updated_at":""}'
    )
    assert _query(client, {"query": "tide", "k": 3}).data == b'{"results":[],"served_bytes":32}'
    assert _query(client, {"query": "tide", "k": 0}).data == (
        b'{"error":"invalid_request","fields":["k"]}'
    )


def test_golden_ranked_query_body():
    """Test a ranked /query body byte for byte, scores and served_bytes included."""
    docs = [
        _doc("a-flood", "Flood tide at dawn."),
        _doc("b-slack", "Slack water follows the ebb."),
        _doc("c-quay", "Ebb and flow at the quay."),
        _doc("d-lights", "Harbour lights."),
        _doc("e-pilot", "The pilot waits for the ebb ebb."),
        _doc("f-tide", "The ebb tide."),
        _doc("g-ebb", "Ebb, ebb, ebb."),
    ]
    client = _client(build_index(docs, info=INFO))
    body = _query(client, {"query": "ebb", "k": 5}).data

    def result(doc_id, text, digest, score):
        return (
            f'{{"chunk_id":"{doc_id}#0-{len(text)}","digest":"{digest}","doc_id":"{doc_id}",'
            f'"end":{len(text)},"license":"cc-by-4.0","media_type":"plain","score":{score},'
            f'"source_id":"src-a","start":0,"text":"{text}","updated_at":"2025-12-01T00:00:00Z",'
            f'"uri":"https://a.example/{doc_id}"}}'
        )

    expected = (
        '{"results":['
        + ",".join([
            result("g-ebb", "Ebb, ebb, ebb.", "5540ba612355cc00", "0.5155662298202515"),
            result("f-tide", "The ebb tide.", "b90b278a63fb9619", "0.2947288155555725"),
            result("e-pilot", "The pilot waits for the ebb ebb.", "a9553b542c8cee5a", "0.2777622640132904"),
            result("c-quay", "Ebb and flow at the quay.", "55cddbece1daf2f1", "0.20623113214969635"),
            result("b-slack", "Slack water follows the ebb.", "5280bdbf3860bb04", "0.19421280920505524"),
        ])
        + '],"served_bytes":1455}'
    )
    assert body == expected.encode("utf-8")
    assert len(body) == 1455


def test_invalid_timestamp_is_not_fresh():
    """Test a chunk with an unparseable fetched_at fails freshness instead of erroring."""
    client = _client(build_index([_doc("a1", "tide tables", fetched_at="March 2025")], info=INFO))
    resp = _query(client, {"query": "tide", "k": 5, "constraints": {"max_age_days": 30}})
    assert resp.status_code == 200
    assert resp.get_json()["results"] == []
    assert len(_query(client, {"query": "tide", "k": 5}).get_json()["results"]) == 1
