"""Error metrics and the benchmark CSV/JSON output formats.

Errors follow the shared-normalizer convention: the squared spatial error of
a method at time t_j is divided by the mean square space-time norm of the
full-order test solutions, so curves from different trajectories and methods
are directly comparable and the time average of e_j equals the trajectory's
relative space-time error.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ssop.util import wnorm_traj

SUMMARY_COLUMNS = [
    "experiment_id",
    "method",
    "mu0",
    "r",
    "trajectory_index",
    "e_timeavg",
    "iterations",
    "online_seconds",
]

TIMESERIES_COLUMNS = [
    "experiment_id",
    "method",
    "mu0",
    "r",
    "trajectory_index",
    "time_index",
    "e_j",
]


def shared_normalizer(weights, test_trajectories):
    """(1/n_test) sum_i ||q_i||^2_{x,t} over the full-order test set."""
    total = sum(wnorm_traj(weights, t.states) ** 2 for t in test_trajectories)
    return total / len(test_trajectories)


def error_series(weights, approx_states, true_states, normalizer, n_omega):
    """e_j per time step with the shared normalizer (zero if both are zero)."""
    diff = np.sum(weights[:, None] * np.abs(approx_states - true_states) ** 2, axis=0)
    if normalizer == 0.0:
        return np.zeros_like(diff)
    return diff / (normalizer / n_omega)


def time_averaged_error(e_j):
    return float(np.mean(e_j))


@dataclass
class MetricsRecord:
    experiment_id: str
    method: str
    mu0: float
    r: int
    trajectory_index: int
    e_timeavg: float
    iterations: int | None = None
    online_seconds: float | None = None
    e_series: np.ndarray | None = None

    def summary_row(self):
        return [
            self.experiment_id,
            self.method,
            f"{self.mu0:.6g}",
            self.r,
            self.trajectory_index,
            f"{self.e_timeavg:.12e}",
            "" if self.iterations is None else self.iterations,
            "" if self.online_seconds is None else f"{self.online_seconds:.6e}",
        ]


@dataclass
class MetricsSet:
    records: list = field(default_factory=list)

    def add(self, record: MetricsRecord):
        self.records.append(record)

    def extend(self, records):
        self.records.extend(records)

    def aggregate(self, method=None, mu0=None, r=None):
        """Mean time-averaged error over matching trajectories."""
        sel = [
            rec.e_timeavg
            for rec in self.records
            if (method is None or rec.method == method)
            and (mu0 is None or np.isclose(rec.mu0, mu0))
            and (r is None or rec.r == r)
        ]
        return float(np.mean(sel)) if sel else np.nan

    def methods(self):
        return sorted({rec.method for rec in self.records})

    def write_summary_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SUMMARY_COLUMNS)
            for rec in self.records:
                writer.writerow(rec.summary_row())
        return path

    def write_timeseries_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TIMESERIES_COLUMNS)
            for rec in self.records:
                if rec.e_series is None:
                    continue
                for j, val in enumerate(rec.e_series):
                    writer.writerow(
                        [
                            rec.experiment_id,
                            rec.method,
                            f"{rec.mu0:.6g}",
                            rec.r,
                            rec.trajectory_index,
                            j,
                            f"{val:.12e}",
                        ]
                    )
        return path

    def summary_dict(self):
        out = {}
        for method in self.methods():
            out[method] = {
                "e_timeavg_mean": self.aggregate(method=method),
                "n_trajectories": sum(1 for rec in self.records if rec.method == method),
            }
        return out


def write_json_summary(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    return path
