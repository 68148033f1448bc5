from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..exceptions import ConfigError, DataError

SOURCES = ("output", "loss")
ORIGINS = (
    "output_grad", "loss_grad", "lowest", "random",
    "least_important", "sffs")


@dataclass
class ImportanceVector:
    """Accumulated absolute input gradients per feature band.

    :param scores: F non-negative reals.
    :param str source: ``output`` or ``loss``.
    :param model_id: member index or other identifier.
    :param str unit_rule: scalar that was differentiated in output mode
        (``true_class``, ``argmax`` or ``sum``).
    """

    scores: np.ndarray
    source: str
    model_id: object = None
    unit_rule: str = ""

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if self.source not in SOURCES:
            raise ConfigError(f"unknown importance source <{self.source}>")
        if not np.all(np.isfinite(self.scores)):
            raise DataError("importance scores must be finite")
        if np.any(self.scores < 0):
            raise DataError("importance scores must be non-negative")

    def __len__(self):
        return self.scores.shape[0]


@dataclass
class VoteTally:
    votes: np.ndarray
    n_models: int
    summed_scores: np.ndarray

    def __post_init__(self):
        self.votes = np.asarray(self.votes, dtype=int)
        self.summed_scores = np.asarray(self.summed_scores, dtype=np.float64)
        if np.any(self.votes > self.n_models) or np.any(self.votes < 0):
            raise DataError("vote counts must lie in [0, n_models]")

    def to_frame(self):
        return pd.DataFrame({
            "band_index": np.arange(self.votes.shape[0]),
            "votes": self.votes,
            "summed_score": self.summed_scores})


@dataclass
class FeatureMask:
    """Strictly ascending set of selected band indices.

    :param indices: selected band indices (any order, de-duplicated).
    :param str origin: how the mask was produced.
    :param int n_bands: width F of the matrices it applies to.
    :param dict details: extra provenance, e.g. the random seed.
    """

    indices: tuple
    origin: str
    n_bands: int
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        indices = sorted(int(i) for i in self.indices)
        if not indices:
            raise DataError("feature mask can't be empty")
        if len(set(indices)) != len(indices):
            raise DataError(f"duplicate indices in mask {indices}")
        if self.origin not in ORIGINS:
            raise ConfigError(f"unknown mask origin <{self.origin}>")
        for index in indices:
            if not 0 <= index < self.n_bands:
                raise DataError(
                    f"mask index {index} out of range for "
                    f"{self.n_bands} bands")
        self.indices = tuple(indices)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def complement(self):
        rest = [i for i in range(self.n_bands) if i not in self.indices]
        return FeatureMask(rest, self.origin, self.n_bands)
