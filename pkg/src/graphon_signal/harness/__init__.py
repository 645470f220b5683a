"""Experiment orchestration and report emission."""

from .experiments import (
    count_inversions,
    default_class_models,
    default_sbm,
    default_stability_spec,
    generalization_gap_experiment,
    sampling_experiment,
    stability_experiment,
    tightest_lipschitz,
)
from .report import Report, format_value, report_emit

__all__ = [
    "count_inversions",
    "default_class_models",
    "default_sbm",
    "default_stability_spec",
    "generalization_gap_experiment",
    "sampling_experiment",
    "stability_experiment",
    "tightest_lipschitz",
    "Report",
    "format_value",
    "report_emit",
]
