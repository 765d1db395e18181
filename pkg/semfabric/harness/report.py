"""
Aggregate tables over experiment rows.

    sufficiency        questions with sufficient context per configuration
    transfer           median / IQR of transfer_fraction and the reduction
    query_processing   decomposed / rephrased / unchanged / pii counts
"""

import logging
from pathlib import Path
from typing import Dict, List

import pandas as pd

from ..errors import ReportError
from .experiment import ExperimentRow

logger = logging.getLogger(__name__)

CONFIG_COLUMNS = ["mode", "s", "k", "k_final", "budget_tokens"]
NULLABLE_INT_COLUMNS = ["s", "k", "k_final"]
BOOL_COLUMNS = ["sufficient", "was_rephrased", "was_decomposed", "pii_removed"]


def rows_to_frame(rows: List[ExperimentRow]) -> pd.DataFrame:
    frame = pd.DataFrame([r.to_dict() for r in rows], columns=ExperimentRow.field_names())
    for col in NULLABLE_INT_COLUMNS:
        frame[col] = frame[col].astype("Int64")
    frame["transfer_fraction"] = frame["transfer_fraction"].astype("float64")
    return frame


def write_rows_csv(rows: List[ExperimentRow], path: Path) -> Path:
    """Rows CSV; the header is exactly the ExperimentRow field names."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows_to_frame(rows).to_csv(path, index=False, lineterminator="\n")
    return path


def read_rows_csv(path: Path) -> List[ExperimentRow]:
    frame = pd.read_csv(path, dtype={c: "Int64" for c in NULLABLE_INT_COLUMNS})
    missing = [c for c in ExperimentRow.field_names() if c not in frame.columns]
    if missing:
        raise ReportError(f"{path}: missing column(s) {', '.join(missing)}")

    rows = []
    for rec in frame.to_dict("records"):
        def opt_int(v):
            return None if pd.isna(v) else int(v)
        rows.append(ExperimentRow(
            qid=str(rec["qid"]),
            mode=str(rec["mode"]),
            s=opt_int(rec["s"]),
            k=opt_int(rec["k"]),
            k_final=opt_int(rec["k_final"]),
            budget_tokens=int(rec["budget_tokens"]),
            chunks_retrieved=int(rec["chunks_retrieved"]),
            bytes_transferred=int(rec["bytes_transferred"]),
            baseline_bytes=int(rec["baseline_bytes"]),
            transfer_fraction=None if pd.isna(rec["transfer_fraction"]) else float(rec["transfer_fraction"]),
            sufficient=bool(rec["sufficient"]),
            was_rephrased=bool(rec["was_rephrased"]),
            was_decomposed=bool(rec["was_decomposed"]),
            pii_removed=bool(rec["pii_removed"]),
            failed_sources=int(rec["failed_sources"]),
        ))
    return rows


def sufficiency_table(frame: pd.DataFrame) -> pd.DataFrame:
    grouped = frame.groupby(CONFIG_COLUMNS, dropna=False, sort=True)
    table = grouped.agg(
        questions=("qid", "count"),
        sufficient=("sufficient", "sum"),
        chunks_median=("chunks_retrieved", "median"),
    ).reset_index()
    table["sufficient"] = table["sufficient"].astype(int)
    return table


def transfer_table(frame: pd.DataFrame) -> pd.DataFrame:
    grouped = frame.groupby(CONFIG_COLUMNS, dropna=False, sort=True)["transfer_fraction"]
    table = pd.DataFrame({
        "median_fraction": grouped.median(),
        "q1": grouped.quantile(0.25),
        "q3": grouped.quantile(0.75),
    })
    table["iqr"] = table["q3"] - table["q1"]
    table["reduction"] = 1.0 - table["median_fraction"]
    return table.reset_index()


def query_processing_table(frame: pd.DataFrame) -> pd.DataFrame:
    """Counts per question (each qid once, whatever the number of configurations)."""
    per_question = frame.drop_duplicates("qid")
    decomposed = per_question["was_decomposed"].astype(bool)
    rephrased = per_question["was_rephrased"].astype(bool) & ~decomposed
    return pd.DataFrame([{
        "questions": len(per_question),
        "decomposed": int(decomposed.sum()),
        "rephrased": int(rephrased.sum()),
        "unchanged": int((~decomposed & ~rephrased).sum()),
        "pii": int(per_question["pii_removed"].astype(bool).sum()),
    }])


def report(rows: List[ExperimentRow]) -> Dict[str, pd.DataFrame]:
    """
    Build the aggregate tables.

    Raises:
        ReportError: rows is empty
    """
    if not rows:
        raise ReportError("no experiment rows to report on")
    frame = rows_to_frame(rows)
    return {
        "sufficiency": sufficiency_table(frame),
        "transfer": transfer_table(frame),
        "query_processing": query_processing_table(frame),
    }


def write_report(tables: Dict[str, pd.DataFrame], out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, table in tables.items():
        path = out_dir / f"{name}.csv"
        table.to_csv(path, index=False, lineterminator="\n")
        paths.append(path)
        logger.debug("wrote %s (%d rows)", path, len(table))
    return paths
