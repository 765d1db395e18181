#!/usr/bin/env python3
"""semfabric CLI."""

import argparse
import json
import logging
import sys
from pathlib import Path

import httpx

from . import __version__
from .errors import InputError, RetrievalError, SemfabricError
from .wire import Constraints, render


def _status(msg: str):
    print(msg, file=sys.stderr)


def _split_params(args):
    from .chunker import SplitParams
    params = SplitParams(chunk_size=args.chunk_size, overlap=args.overlap)
    params.validate()
    return params


def _constraints(args) -> Constraints:
    return Constraints(
        licenses=args.license or None,
        topics=args.topic or None,
        max_age_days=args.max_age_days,
        media_types=args.media_type or None,
    )


def _parse_addr(addr: str):
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise InputError(f"--addr must be host:port, got {addr!r}")
    return host, int(port)


# --- commands --------------------------------------------------------------

def cmd_make_fixture(args):
    from .corpus import write_fixture_corpus
    manifest = write_fixture_corpus(args.out, seed=args.seed)
    _status(f"✅ Fixture corpus written to {args.out}")
    _status(f"   {manifest.sources} sources, {manifest.documents} documents, {manifest.questions} questions")


def cmd_ingest(args):
    from .corpus import SourceInfo, load_catalog, load_corpus
    from .source import ingest_source

    documents, _ = load_corpus(args.corpus)
    docs = [d for d in documents if d.source_id == args.source]
    if not docs:
        _status(f"⚠️  No documents for source {args.source}; writing an empty index")
    info = load_catalog(args.corpus).get(args.source, SourceInfo.default(args.source))
    index = ingest_source(docs, args.out, _split_params(args), info=info)
    _status(f"✅ Indexed {len(index)} chunks from {len(docs)} documents → {args.out}")
    _status(f"   digest {index.digest()}")


def cmd_ingest_all(args):
    from .corpus import load_catalog, load_corpus
    from .source import CENTRAL_SOURCE_ID, build_central_index, ingest_corpus

    documents, _ = load_corpus(args.corpus)
    catalog = load_catalog(args.corpus)
    out = Path(args.out)
    indexes = ingest_corpus(documents, catalog, _split_params(args))
    for sid, index in indexes.items():
        index.persist(out / f"{sid}.index")
        _status(f"   📦 {sid}: {len(index)} chunks")
    central = build_central_index(indexes, catalog)
    central.persist(out / f"{CENTRAL_SOURCE_ID}.index")
    _status(f"✅ {len(indexes)} source indexes + central ({len(central)} chunks) → {out}")


def _register(resolver: str, manifest: dict):
    url = resolver.rstrip("/") + "/register"
    try:
        response = httpx.post(url, content=render(manifest),
                              headers={"Content-Type": "application/json"}, timeout=30.0)
    except httpx.HTTPError as e:
        raise RetrievalError(url, str(e))
    if response.status_code != 200:
        raise RetrievalError(url, f"HTTP {response.status_code}: {response.text}")
    return response.json()


def cmd_serve_source(args):
    from .source import create_source_app, load_server

    host, port = _parse_addr(args.addr)
    endpoint = args.public_url or f"http://{args.addr}"
    server = load_server(args.index, endpoint)
    if not server.loaded:
        _status("⚠️  Index not loaded; /manifest and /query will answer 503")
    elif args.register:
        ack = _register(args.register, server.manifest().to_dict())
        _status(f"   📡 Registered {ack['source_id']} with {args.register}")
    _status(f"🚀 Serving source on {endpoint}")
    create_source_app(server).run(host=host, port=port, threaded=True)


def cmd_serve_resolver(args):
    from .resolver import Registry, create_resolver_app

    host, port = _parse_addr(args.addr)
    registry = Registry(state_path=args.state)
    _status(f"🚀 Serving resolver on http://{args.addr} ({len(registry)} sources)")
    create_resolver_app(registry).run(host=host, port=port, threaded=True)


def cmd_register(args):
    url = args.source.rstrip("/") + "/manifest"
    try:
        response = httpx.get(url, timeout=30.0)
        response.raise_for_status()
    except httpx.HTTPError as e:
        raise RetrievalError(url, str(e))
    ack = _register(args.resolver, response.json())
    _status(f"✅ Registered {ack['source_id']} (registry size {ack['registry_size']})")


def _find_item(questions, question: str, qid):
    for item in questions:
        if (qid and item.qid == qid) or (not qid and item.question.strip() == question.strip()):
            return item
    return None


def cmd_query(args):
    from .agent import AgentClient, LLMQueryProcessor, process_query

    hook = LLMQueryProcessor(model=args.llm_model) if args.llm else None
    pq = process_query(args.question, hook)
    constraints = _constraints(args)
    agent = AgentClient(parallelism=args.parallelism)
    try:
        if args.mode == "centralized":
            if not args.central:
                raise InputError("--central is required for centralized mode")
            result = agent.retrieve_centralized(pq, args.k, args.central, constraints)
        elif args.mode == "decentralized":
            if not args.resolver:
                raise InputError("--resolver is required for decentralized mode")
            result = agent.retrieve_decentralized(pq, args.s, args.k, args.resolver, constraints)
        elif args.mode == "hybrid":
            if not args.resolver:
                raise InputError("--resolver is required for hybrid mode")
            result = agent.retrieve_hybrid(pq, args.s, args.k, args.k_final, args.resolver, constraints)
        else:
            from .corpus import load_corpus
            if not args.corpus:
                raise InputError("--corpus is required for full mode")
            documents, questions = load_corpus(args.corpus)
            item = _find_item(questions, args.question, args.qid)
            if item is None:
                raise InputError("question not found in corpus (use --qid)")
            result = agent.retrieve_full_context(item, {d.doc_id: d for d in documents},
                                                 args.budget_tokens)
    finally:
        agent.close()

    for sid, error in result.failed_sources.items():
        _status(f"⚠️  source {sid} failed: {error}")
    out = {"query": pq.to_dict(), "result": result.to_dict()}
    print(json.dumps(out, indent=2, ensure_ascii=False))
    _status(f"✅ {len(result.context_chunks)} chunks, {result.ledger.total} bytes")


def cmd_experiment(args):
    from .harness import load_config, report, run_config_file, write_metadata, write_report, write_rows_csv

    grid = load_config(args.config)
    out = Path(args.out) if args.out else (grid.out or Path("results"))
    configs = grid.expand()
    _status(f"🧪 Running {len(configs)} configuration(s){' in process' if grid.in_process else ''}")
    rows = run_config_file(grid)
    write_rows_csv(rows, out / "rows.csv")
    write_metadata(out / "metadata.json", grid)
    if rows:
        write_report(report(rows), out)
    _status(f"✅ {len(rows)} rows → {out / 'rows.csv'}")


def cmd_report(args):
    from .harness import read_rows_csv, report, write_report

    tables = report(read_rows_csv(args.rows))
    if args.out:
        for path in write_report(tables, args.out):
            _status(f"   📊 {path}")
    else:
        for name, table in tables.items():
            print(f"# {name}")
            print(table.to_csv(index=False, lineterminator="\n"))


def main(argv=None):
    parser = argparse.ArgumentParser(
        description='semfabric - semantic retrieval fabric and data-efficiency harness'
    )
    parser.add_argument('--version', action='version', version=f'semfabric v{__version__}')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')

    subparsers = parser.add_subparsers(dest='command', help='Command')

    def chunk_flags(p):
        p.add_argument('--chunk-size', type=int, default=1000, help='Chunk size in chars (default: 1000)')
        p.add_argument('--overlap', type=int, default=100, help='Overlap in chars (default: 100)')

    def constraint_flags(p):
        p.add_argument('--license', action='append', help='Allowed license (repeatable)')
        p.add_argument('--topic', action='append', help='Required topic (repeatable, any match)')
        p.add_argument('--max-age-days', type=int, help='Maximum content age in days')
        p.add_argument('--media-type', action='append', help='Allowed media type (repeatable)')

    fixture = subparsers.add_parser('make-fixture', help='Write the deterministic fixture corpus')
    fixture.add_argument('out', type=Path, help='Output directory')
    fixture.add_argument('--seed', type=int, default=7, help='Generator seed (default: 7)')
    fixture.set_defaults(func=cmd_make_fixture)

    ingest = subparsers.add_parser('ingest', help='Build the index of one source')
    ingest.add_argument('--corpus', type=Path, required=True, help='Corpus directory')
    ingest.add_argument('--source', required=True, help='Source id')
    ingest.add_argument('--out', type=Path, required=True, help='Index file to write')
    chunk_flags(ingest)
    ingest.set_defaults(func=cmd_ingest)

    ingest_all = subparsers.add_parser('ingest-all', help='Build every source index plus the central one')
    ingest_all.add_argument('--corpus', type=Path, required=True, help='Corpus directory')
    ingest_all.add_argument('--out', type=Path, required=True, help='Output directory')
    chunk_flags(ingest_all)
    ingest_all.set_defaults(func=cmd_ingest_all)

    serve_source = subparsers.add_parser('serve-source', help='Serve one index over HTTP')
    serve_source.add_argument('--index', type=Path, required=True, help='Index file')
    serve_source.add_argument('--addr', default='127.0.0.1:8101', help='host:port (default: 127.0.0.1:8101)')
    serve_source.add_argument('--public-url', help='Endpoint advertised in the manifest')
    serve_source.add_argument('--register', metavar='RESOLVER_URL', help='Register with a resolver at startup')
    serve_source.set_defaults(func=cmd_serve_source)

    serve_resolver = subparsers.add_parser('serve-resolver', help='Serve the semantic resolver')
    serve_resolver.add_argument('--addr', default='127.0.0.1:8100', help='host:port (default: 127.0.0.1:8100)')
    serve_resolver.add_argument('--state', type=Path, help='JSONL registry state file')
    serve_resolver.set_defaults(func=cmd_serve_resolver)

    register = subparsers.add_parser('register', help='Register a running source with a resolver')
    register.add_argument('--resolver', required=True, help='Resolver URL')
    register.add_argument('--source', required=True, help='Source URL')
    register.set_defaults(func=cmd_register)

    query = subparsers.add_parser('query', help='Retrieve context for a question')
    query.add_argument('question', help='Question text')
    query.add_argument('--mode', choices=['centralized', 'decentralized', 'hybrid', 'full'],
                       default='decentralized', help='Retrieval strategy')
    query.add_argument('--resolver', help='Resolver URL')
    query.add_argument('--central', help='Central source URL')
    query.add_argument('--s', type=int, default=3, help='Sources per subquery (default: 3)')
    query.add_argument('--k', type=int, default=5, help='Chunks per source (default: 5)')
    query.add_argument('--k-final', type=int, default=5, help='Chunks kept in hybrid mode (default: 5)')
    query.add_argument('--budget-tokens', type=int, default=250000, help='Full-context token budget')
    query.add_argument('--corpus', type=Path, help='Corpus directory (full mode)')
    query.add_argument('--qid', help='Question id in the corpus (full mode)')
    query.add_argument('--parallelism', type=int, default=8, help='Fan-out parallelism (default: 8)')
    query.add_argument('--llm', action='store_true', help='Rephrase/decompose with Claude (needs ANTHROPIC_API_KEY)')
    query.add_argument('--llm-model', default='claude-sonnet-4-5', help='Claude model for --llm')
    constraint_flags(query)
    query.set_defaults(func=cmd_query)

    experiment = subparsers.add_parser('experiment', help='Run an experiment grid')
    experiment.add_argument('--config', type=Path, required=True, help='Flat key=value config file')
    experiment.add_argument('--out', type=Path, help='Output directory (default: config out or ./results)')
    experiment.set_defaults(func=cmd_experiment)

    rep = subparsers.add_parser('report', help='Aggregate tables from a rows CSV')
    rep.add_argument('--rows', type=Path, required=True, help='rows.csv from an experiment')
    rep.add_argument('--out', type=Path, help='Directory for table CSVs (default: stdout)')
    rep.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(1)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        args.func(args)
    except SemfabricError as e:
        _status(f"❌ {e}")
        sys.exit(1)
    except KeyboardInterrupt:
        _status("\n⚠️  Interrupted")
        sys.exit(130)


if __name__ == '__main__':
    main()
