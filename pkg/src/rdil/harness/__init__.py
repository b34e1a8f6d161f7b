"""Experimental protocol: noise sweeps, result storage, statistics and reports."""

from .config import METHODS, ConfigError, DatasetRef, ExperimentConfig, dump_config, load_config
from .experiment import Record, ResultsStore, run_experiment
from .report import Report, render_report
from .stats import WilcoxonResult, gel_counts, noise_identification_metrics, wilcoxon_signed_ranks

__all__ = [
    "METHODS",
    "ConfigError",
    "DatasetRef",
    "ExperimentConfig",
    "Record",
    "Report",
    "ResultsStore",
    "WilcoxonResult",
    "dump_config",
    "gel_counts",
    "load_config",
    "noise_identification_metrics",
    "render_report",
    "run_experiment",
    "wilcoxon_signed_ranks",
]
