"""
Experiment harness: configuration grids, the in-process fabric, the
sufficiency oracle, experiment runs and report tables.
"""

from .config import ExperimentConfig, GridConfig, Mode, load_config, parse_config
from .sufficiency import normalize_answer, sufficiency
from .fabric import CENTRAL_URL, RESOLVER_URL, LocalFabric, source_url
from .experiment import (
    K_SEMANTICS,
    Experiment,
    ExperimentRow,
    run_config_file,
    run_experiment,
    run_grid,
    write_metadata,
)
from .report import read_rows_csv, report, rows_to_frame, write_report, write_rows_csv

__all__ = ['ExperimentConfig', 'GridConfig', 'Mode', 'load_config', 'parse_config', 'normalize_answer', 'sufficiency', 'CENTRAL_URL', 'RESOLVER_URL', 'LocalFabric', 'source_url', 'K_SEMANTICS', 'Experiment', 'ExperimentRow', 'run_config_file', 'run_experiment', 'run_grid', 'write_metadata', 'read_rows_csv', 'report', 'rows_to_frame', 'write_report', 'write_rows_csv']
