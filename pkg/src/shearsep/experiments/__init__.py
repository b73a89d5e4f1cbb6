"""Named desk-scale experiments with deterministic seeding and reports."""

from .config import DEFAULT_CONFIGS, ExperimentConfig
from .report import ExperimentReport, SweepRow, Verdict
from .runners import (
    run_experiment,
    run_explosive,
    run_heuristic_scaling,
    run_multiscale,
    run_nonuniqueness_demo,
    run_rescaled_block,
    run_single_scale,
)

__all__ = [
    "DEFAULT_CONFIGS",
    "ExperimentConfig",
    "ExperimentReport",
    "SweepRow",
    "Verdict",
    "run_experiment",
    "run_explosive",
    "run_heuristic_scaling",
    "run_multiscale",
    "run_nonuniqueness_demo",
    "run_rescaled_block",
    "run_single_scale",
]
