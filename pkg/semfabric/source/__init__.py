"""
AI-native source: ingestion and the chunk-serving HTTP service.
"""

from .ingest import (
    CENTRAL_SOURCE_ID,
    build_central_index,
    build_index,
    ingest_corpus,
    ingest_source,
)
from .server import SourceServer, create_source_app, load_server

__all__ = ['CENTRAL_SOURCE_ID', 'build_central_index', 'build_index', 'ingest_corpus', 'ingest_source', 'SourceServer', 'create_source_app', 'load_server']
