"""Benchmark harness: CSV queries swept over mechanisms and privacy budgets."""

from .data import QueryKind, Series, auto_bounds, auto_sensitivity, ingest_csv, mode, run_query
from .metrics import Metrics, compute_metrics
from .runner import (DEFAULT_EPSILONS, DEFAULT_MECHANISMS, ROW_FIELDS, BenchConfig,
                     BenchReport, cell_seed, run_benchmark)

__all__ = [
    "QueryKind", "Series", "auto_bounds", "auto_sensitivity", "ingest_csv", "mode",
    "run_query", "Metrics", "compute_metrics", "DEFAULT_EPSILONS", "DEFAULT_MECHANISMS",
    "ROW_FIELDS", "BenchConfig", "BenchReport", "cell_seed", "run_benchmark",
]
