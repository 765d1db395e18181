"""End-to-end tests for the semfabric command line."""

import json
import tempfile
from pathlib import Path

import pytest

from semfabric.cli import main
from semfabric.store import VectorIndex


def test_make_fixture_and_ingest():
    """Test writing the fixture and ingesting one source."""
    with tempfile.TemporaryDirectory() as tmpdir:
        corpus = Path(tmpdir) / "corpus"
        main(["make-fixture", str(corpus)])
        assert (corpus / "sources.jsonl").exists()

        out = Path(tmpdir) / "src-02.jsonl"
        main(["ingest", "--corpus", str(corpus), "--source", "src-02", "--out", str(out)])
        index = VectorIndex.load(out)
        assert index.header["source_id"] == "src-02"
        assert index.doc_ids() == ["s02a", "s02b"]


def test_query_full_mode_prints_json(capsys, fixture_corpus):
    """Test a full-context query prints JSON."""
    item = fixture_corpus["questions"][20]
    main(["query", item.question, "--mode", "full", "--corpus", str(fixture_corpus["path"]),
          "--qid", item.qid])
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["mode"] == "full_context"
    assert out["result"]["included_docs"] == item.source_rank


def test_query_without_endpoint_fails(capsys):
    """Test a decentralized query without a resolver."""
    with pytest.raises(SystemExit) as exc:
        main(["query", "Who is it?", "--mode", "decentralized"])
    assert exc.value.code == 1
    assert "--resolver" in capsys.readouterr().err


def test_experiment_and_report(fixture_corpus):
    """Test running a grid and re-reporting its rows."""
    with tempfile.TemporaryDirectory() as tmpdir:
        config = Path(tmpdir) / "grid.env"
        config.write_text(f"mode = centralized,full\nk = 5\ncorpus = {fixture_corpus['path']}\n"
                          "in_process = true\n")
        out = Path(tmpdir) / "results"
        main(["experiment", "--config", str(config), "--out", str(out)])

        rows = (out / "rows.csv").read_text().splitlines()
        assert len(rows) == 1 + 2 * fixture_corpus["manifest"].questions
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["k_semantics"] == "per_subquery"
        assert (out / "transfer.csv").exists()

        tables = Path(tmpdir) / "tables"
        main(["report", "--rows", str(out / "rows.csv"), "--out", str(tables)])
        assert (tables / "sufficiency.csv").exists()


def test_report_of_missing_columns(capsys):
    """Test reporting a CSV with missing columns."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "rows.csv"
        path.write_text("qid,mode\nq1,centralized\n")
        with pytest.raises(SystemExit):
            main(["report", "--rows", str(path)])
        assert "missing column" in capsys.readouterr().err
