from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DataError

SPLITS = ("train", "dev", "test")


@dataclass
class LabeledExample:
    """One utterance: named feature inputs and an optional target.

    :param str id: identifier, unique within the dataset.
    :param dict inputs: input name → :class:`FeatureMatrix`.
    :param target: class index, real sequence, or None when unlabeled.
    :param audio: source :class:`AudioBuffer` when kept (benchmarking).
    """

    id: str
    inputs: dict
    target: object = None
    audio: object = None

    @property
    def labeled(self):
        return self.target is not None

    def select_inputs(self, names):
        missing = [n for n in names if n not in self.inputs]
        if missing:
            raise DataError(
                f"example <{self.id}> has no input named {missing}")
        return {n: self.inputs[n] for n in names}

    def with_inputs(self, inputs):
        return LabeledExample(self.id, inputs, self.target, self.audio)


@dataclass
class Dataset:
    """Labeled examples split into train/dev/test.

    ``metadata`` carries provenance only (source, seed, planted bands of
    synthetic data); the training API never receives it.
    """

    task: str
    splits: dict
    metadata: dict = field(default_factory=dict)
    class_names: list = field(default_factory=list)

    def __post_init__(self):
        for name in self.splits:
            if name not in SPLITS:
                raise DataError(f"unknown split <{name}>")
        self.splits = {s: list(self.splits.get(s, [])) for s in SPLITS}
        if not self.splits["train"]:
            raise DataError("train split is empty")
        self.check_disjoint()

    def __len__(self):
        return sum(len(v) for v in self.splits.values())

    def __repr__(self):
        sizes = {k: len(v) for k, v in self.splits.items()}
        return f"Dataset(task={self.task}, splits={sizes})"

    @property
    def train(self):
        return self.splits["train"]

    @property
    def dev(self):
        return self.splits["dev"]

    @property
    def test(self):
        return self.splits["test"]

    @property
    def labeled(self):
        return all(e.labeled for s in self.splits.values() for e in s)

    @property
    def input_names(self):
        return list(self.train[0].inputs)

    def split(self, name):
        if name not in SPLITS:
            raise DataError(f"unknown split <{name}>")
        return self.splits[name]

    def n_features(self, input_name):
        return self.train[0].inputs[input_name].n_bands

    @property
    def n_classes(self):
        if self.class_names:
            return len(self.class_names)
        labels = [e.target for s in self.splits.values() for e in s
                  if e.labeled]
        return int(max(labels)) + 1 if labels else 0

    def check_disjoint(self):
        """Raise if an id appears twice inside or across splits."""
        seen = {}
        for split, examples in self.splits.items():
            for example in examples:
                if example.id in seen:
                    raise DataError(
                        f"example id <{example.id}> appears in "
                        f"{seen[example.id]} and {split}")
                seen[example.id] = split

    def map_inputs(self, function):
        """New dataset whose examples' inputs are ``function(example)``."""
        splits = {
            name: [e.with_inputs(function(e)) for e in examples]
            for name, examples in self.splits.items()}
        return Dataset(self.task, splits, dict(self.metadata),
                       list(self.class_names))

    def targets(self, split):
        examples = self.split(split)
        if self.task == "classification":
            return np.array([e.target for e in examples], dtype=int)
        return [np.asarray(e.target, dtype=np.float64) for e in examples]
