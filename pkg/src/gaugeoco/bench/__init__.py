"""Benchmark harness: bodies-from-config, certified comparators, regret
accounting, baselines, experiment runner, and the command-line interface."""

from .comparators import BodyHandle, ComparatorResult, euclidean_project, make_body, offline_comparator
from .regret import (
    LossPrefix,
    SlopeFit,
    dyadic_intervals,
    interval_regret_scan,
    loglinear_fit,
    per_segment_regrets,
    slope_fit,
)
from .runner import (
    BodyConfig,
    EstimatorConfig,
    ExperimentConfig,
    LossConfig,
    RegretReport,
    negative_control_config,
    run_experiment,
    run_sweep,
)
