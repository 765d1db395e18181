"""
semfabric
=========

Semantic retrieval fabric: chunk-serving sources, a semantic resolver,
an agent client, and an experiment harness for data-efficiency measurements.

Usage:
    semfabric ingest --corpus ./corpus --source src-01 --out src-01.index
    semfabric serve-source --index src-01.index --addr 127.0.0.1:8101
    semfabric serve-resolver --addr 127.0.0.1:8100
    semfabric query --mode decentralized --resolver http://127.0.0.1:8100 "Who wrote Hamlet?"
    semfabric experiment --config grid.env
"""

__version__ = "0.4.0"
