from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DataError


@dataclass
class ConfusionMatrix:
    """K × K counts, rows are true classes, columns predictions."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or (
                self.counts.shape[0] != self.counts.shape[1]):
            raise DataError("confusion matrix must be square")
        if np.any(self.counts < 0):
            raise DataError("confusion counts must be non-negative")

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def n_classes(self):
        return self.counts.shape[0]


@dataclass
class EvaluationReport:
    """Metrics of an ensemble and of its members on one split."""

    task: str
    metrics: dict
    confusion: ConfusionMatrix = None
    per_file: object = None
    members: object = None
    predictions: dict = field(default_factory=dict)


@dataclass
class BenchmarkReport:
    system: str
    n_features: int
    n_members: int
    parameter_count: int
    mean_ms: float
    median_ms: float
    p95_ms: float
    examples_measured: int
    includes_feature_extraction: bool

    def __post_init__(self):
        if self.examples_measured < 1:
            raise DataError("benchmark needs a non-empty sample")

    def to_row(self):
        return {
            "system": self.system,
            "n_features": self.n_features,
            "n_members": self.n_members,
            "params": self.parameter_count,
            "mean_ms": self.mean_ms,
            "median_ms": self.median_ms,
            "p95_ms": self.p95_ms,
        }
