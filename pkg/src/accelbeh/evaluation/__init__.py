"""Splitting, tuning, metrics and the end-to-end experiment."""

from .experiment import ExperimentResult, run_experiment
from .metrics import MetricsReport, cohens_kappa, compute_metrics
from .split import GroupedSplit, grouped_stratified_split, split_windows
from .tune import TuneResult, tune

__all__ = [
    "ExperimentResult",
    "GroupedSplit",
    "MetricsReport",
    "TuneResult",
    "cohens_kappa",
    "compute_metrics",
    "grouped_stratified_split",
    "run_experiment",
    "split_windows",
    "tune",
]
