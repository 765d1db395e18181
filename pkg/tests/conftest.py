"""Shared fixtures: the generated corpus and an in-process fabric over it."""

from datetime import datetime, timezone

import httpx
import pytest

from semfabric.corpus import load_catalog, load_corpus, write_fixture_corpus
from semfabric.harness import LocalFabric

FIXED_NOW = datetime(2026, 1, 1, tzinfo=timezone.utc)


def fixed_clock() -> datetime:
    return FIXED_NOW


class RecordingTransport(httpx.BaseTransport):
    """Wraps a transport and logs (host, request bytes, response bytes) per exchange."""

    def __init__(self, inner: httpx.BaseTransport, log: list):
        self.inner = inner
        self.log = log

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        response = self.inner.handle_request(request)
        response.read()
        self.log.append((request.url.host, len(request.content), len(response.content),
                         response.status_code))
        return response


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    manifest = write_fixture_corpus(root)
    documents, questions = load_corpus(root)
    return {
        "path": root,
        "manifest": manifest,
        "documents": documents,
        "questions": questions,
        "catalog": load_catalog(root),
    }


@pytest.fixture(scope="session")
def traffic():
    return []


@pytest.fixture(scope="session")
def fabric(fixture_corpus, traffic):
    with LocalFabric(fixture_corpus["path"], clock=fixed_clock,
                     transport_wrapper=lambda t: RecordingTransport(t, traffic)) as f:
        yield f
