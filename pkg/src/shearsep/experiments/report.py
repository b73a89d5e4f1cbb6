"""Structured experiment reports: sweep rows, verdicts, serialization.

A report is a pure function of its configuration; the wall-clock runtime
is carried as metadata and excluded from the canonical form used for
determinism comparisons.
"""

import csv
import json
from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class Verdict:
    """One pass/fail check, citing the invariant or bound it tests."""

    id: str                 # stable identifier, e.g. "single_scale.slope_window"
    requirement: str        # human-readable statement of what is tested
    passed: bool
    observed: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepRow:
    """One sweep point: estimate with standard error and optional bound."""

    params: dict
    estimate: float
    stderr: float = 0.0
    bound_raw: float | None = None
    bound_clamped: float | None = None
    bound_vacuous: bool | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    config_hash: str
    seeds: dict
    rows: list
    verdicts: list
    runtime_seconds: float = 0.0

    @property
    def all_passed(self):
        return all(v.passed for v in self.verdicts)

    def canonical(self):
        """Deterministic portion of the report (runtime metadata excluded)."""
        return {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seeds": self.seeds,
            "rows": [asdict(r) for r in self.rows],
            "verdicts": [asdict(v) for v in self.verdicts],
        }

    def to_dict(self):
        d = self.canonical()
        d["config"] = self.config
        d["runtime_seconds"] = self.runtime_seconds
        d["all_passed"] = self.all_passed
        return d

    def to_json(self, path=None):
        doc = json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_jsonify)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(doc + "\n")
        return doc

    def table_csv(self, path):
        keys = sorted({k for r in self.rows for k in r.params})
        extras = sorted({k for r in self.rows for k in r.extra})
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(keys + ["estimate", "stderr", "bound_raw", "bound_clamped", "bound_vacuous"] + extras)
            for r in self.rows:
                row = [r.params.get(k, "") for k in keys]
                row += [r.estimate, r.stderr, r.bound_raw, r.bound_clamped, r.bound_vacuous]
                row += [r.extra.get(k, "") for k in extras]
                writer.writerow(row)


def _jsonify(obj):
    import numpy as np

    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")
