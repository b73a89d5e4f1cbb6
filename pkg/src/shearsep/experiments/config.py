"""Experiment configuration: a JSON-serializable, hashable description
from which every report is a pure function."""

import hashlib
import json
from dataclasses import dataclass, field as dc_field, asdict

EXPERIMENTS = (
    "single-scale",
    "rescaled-block",
    "multiscale",
    "explosive",
    "nonuniqueness-demo",
    "heuristic-scaling",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment run.

    Attributes:
      experiment: one of EXPERIMENTS.
      field: field parameters (raw setting: direction/sharpness/
        read_positions; schedule setting: kind/exponent/n_min/n_max).
      noise: driving-noise parameters (kind, scale, hurst, beta,
        amplitude, cells_per_block).
      trials: Monte Carlo trials per sweep point.
      seeds: {"field": base, "noise": base}; the two bases feed disjoint
        counter streams.
      sweep: experiment-specific parameter grid.
      quadrature: {"cells", "nodes"} for the batched block quadrature.
      trials_chunk: fixed trial chunk size (part of the semantics: it
        pins the floating-point reduction order).
      output: optional output directory.
    """

    experiment: str
    field: dict = dc_field(default_factory=dict)
    noise: dict = dc_field(default_factory=lambda: {"kind": "zero"})
    trials: int = 1000
    seeds: dict = dc_field(default_factory=lambda: {"field": 2024, "noise": 4202})
    sweep: dict = dc_field(default_factory=dict)
    quadrature: dict = dc_field(default_factory=lambda: {"cells": 4, "nodes": 16})
    trials_chunk: int = 250
    output: str | None = None
    trace: bool = False
    override_preconditions: bool = False
    workers: int | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sweep:
            raise ValueError("sweep must be nonempty")

    def canonical_dict(self):
        d = asdict(self)
        # output location, tracing and worker count do not affect results
        for k in ("output", "trace", "workers"):
            d.pop(k, None)
        return d

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, doc):
        d = json.loads(doc) if isinstance(doc, str) else dict(doc)
        return cls(**d)

    def config_hash(self):
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **kwargs):
        d = asdict(self)
        d.update(kwargs)
        return ExperimentConfig(**d)


DEFAULT_CONFIGS = {
    "single-scale": ExperimentConfig(
        experiment="single-scale",
        field={"direction": 1, "sharpness": 0.1, "read_positions": [2.0, -2.0]},
        noise={"kind": "brownian", "scale": 0.01, "cells_per_block": 4},
        trials=10_000,
        sweep={
            "block_counts": [100, 1000, 10000],
            "window": 1.0,
            "slope_window": [-0.65, -0.35],
            "clt_blocks": 10000,
            "ks_bound": 0.05,
        },
    ),
    "heuristic-scaling": ExperimentConfig(
        experiment="heuristic-scaling",
        field={"direction": 1, "sharpness": 0.1, "read_positions": [2.0, -2.0]},
        noise={"kind": "brownian", "scale": 0.01, "cells_per_block": 4},
        trials=2000,
        sweep={
            "block_counts": [100, 1000, 10000],
            "slope_window": [0.35, 0.65],
            "amplitude_factor": 2.0,
            "ratio_window": [1.8, 2.2],
            "ratio_blocks": 1000,
        },
    ),
    "rescaled-block": ExperimentConfig(
        experiment="rescaled-block",
        field={"sharpness": 0.1},
        noise={"kind": "brownian", "scale": 0.003, "cells_per_block": 4},
        trials=1000,
        sweep={
            "settings": [{"rho": 0.25, "n": 8}, {"rho": 0.375, "n": 8}],
            "window_shifts": [0, 6, 9],
            "trend": {"rho": 0.25, "n_list": [6, 7, 8], "trials": 400},
            "safety_factor": 2.0,
        },
    ),
    "multiscale": ExperimentConfig(
        experiment="multiscale",
        field={"kind": "v_alpha", "exponent": 0.0, "sharpness": 0.1},
        noise={"kind": "zero"},
        trials=1000,
        sweep={"m": 14, "n": 8, "doubling_floor": 0.8},
    ),
    "explosive": ExperimentConfig(
        experiment="explosive",
        field={"kind": "v_alpha", "exponent": 0.0, "sharpness": 0.1},
        noise={"kind": "zero"},
        trials=400,
        sweep={
            "n_grid": [8, 10, 12],
            "m_grid": [12, 14],
            "r_grid": [0.0009765625, 0.000244140625],
            "delta_grid": [1.52587890625e-05, 0.000244140625, 0.00390625, 0.0625, 1000000.0],
            "trend_level": 0.05,
        },
    ),
    "nonuniqueness-demo": ExperimentConfig(
        experiment="nonuniqueness-demo",
        field={"kind": "u_rho", "exponent": 0.25, "sharpness": 0.1, "n_min": 4, "n_max": 9},
        noise={"kind": "brownian", "scale": 0.002, "cells_per_block": 4},
        trials=1,
        sweep={"m_grid": [5, 6, 7, 8, 9], "angles": 8, "n_obs": 4},
    ),
}
