"""Experiment configuration, ergodic sweeps, reports and the command line."""
from .config import SDMA, ConfigError, ExperimentConfig, dump_config, load_config, parse_config
from .report import ReportKind, report
from .sweep import (
    SCHEMA_ROWS,
    SCHEMA_SUMMARY,
    SweepRow,
    read_rows_csv,
    rows_to_csv,
    run_point,
    run_sweep,
    summarize,
    write_rows_csv,
    write_summary_csv,
)

__all__ = [
    "SDMA",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "dump_config",
    "SweepRow",
    "run_point",
    "run_sweep",
    "rows_to_csv",
    "read_rows_csv",
    "summarize",
    "write_rows_csv",
    "write_summary_csv",
    "SCHEMA_ROWS",
    "SCHEMA_SUMMARY",
    "ReportKind",
    "report",
]
