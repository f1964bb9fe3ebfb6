"""Configurable experiments and their reports."""
from .config import ConfigError, ExperimentConfig
from .experiments import REGISTRY, run_experiment, validate
from .report import ReportFile, read_report, report_csv, report_json, write_report

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "REGISTRY",
    "ReportFile",
    "read_report",
    "report_csv",
    "report_json",
    "run_experiment",
    "validate",
    "write_report",
]
