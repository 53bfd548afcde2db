"""Experiment configuration, Monte-Carlo execution, and reporting."""

from .config import ConfigError, ExperimentConfig
from .runner import ReportRow, pks_policy, run_experiment, run_experiment_records
from .image import image_experiment, synthetic_image
from .timing import bench_timing
from .bounds import run_bound_suite

__all__ = [
    "ConfigError", "ExperimentConfig", "ReportRow", "bench_timing",
    "image_experiment", "pks_policy", "run_bound_suite", "run_experiment",
    "run_experiment_records", "synthetic_image",
]
