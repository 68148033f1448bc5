import json
from dataclasses import dataclass, field, asdict

import numpy as np

from ..exceptions import ConfigError

LAYER_KINDS = ("conv1d", "maxpool1d", "lstm", "dense", "output")
ACTIVATIONS = ("relu", "tanh", "sigmoid", "linear", "softmax")
PADDINGS = ("valid", "same")
TASKS = ("classification", "sequence_regression")


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one layer.

    ``units`` holds the filter count of a convolution, the cell count of an
    LSTM, the width of a dense layer or the number of outputs of the output
    layer. ``stride`` is only read by pooling layers, ``kernel_width`` and
    ``padding`` only by convolutions.
    """

    kind: str
    units: int = 1
    kernel_width: int = 1
    stride: int = 1
    activation: str = "linear"
    padding: str = "valid"

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigError(f"unknown layer kind <{self.kind}>")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation <{self.activation}>")
        if self.activation == "softmax" and self.kind != "output":
            raise ConfigError("softmax is only allowed on the output layer")
        if self.padding not in PADDINGS:
            raise ConfigError(f"unknown padding <{self.padding}>")
        if self.units < 1 or self.kernel_width < 1:
            raise ConfigError(
                f"{self.kind} layer counts must be positive")
        if self.stride < 1:
            raise ConfigError("pooling stride must be at least 1")

    @classmethod
    def conv1d(cls, filters, width, activation="relu", padding="valid"):
        return cls("conv1d", units=filters, kernel_width=width,
                   activation=activation, padding=padding)

    @classmethod
    def maxpool1d(cls, stride):
        return cls("maxpool1d", stride=stride)

    @classmethod
    def lstm(cls, cells):
        return cls("lstm", units=cells, activation="tanh")

    @classmethod
    def dense(cls, units, activation="relu"):
        return cls("dense", units=units, activation=activation)

    @classmethod
    def output(cls, units, activation):
        return cls("output", units=units, activation=activation)


@dataclass(frozen=True)
class BranchSpec:
    """Encoder for one named input: convolutions, pooling and LSTM layers."""

    input_name: str
    n_features: int
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.n_features < 1:
            raise ConfigError(
                f"branch <{self.input_name}> needs at least one feature")
        if not self.layers or self.layers[-1].kind != "lstm":
            raise ConfigError(
                f"branch <{self.input_name}> must end with an lstm layer")
        for layer in self.layers:
            if layer.kind in ("dense", "output"):
                raise ConfigError(
                    f"branch <{self.input_name}> may not contain "
                    f"{layer.kind} layers")

    @property
    def total_stride(self):
        """product of the pooling strides of the branch"""
        return int(np.prod([
            layer.stride for layer in self.layers
            if layer.kind == "maxpool1d"] or [1]))

    def output_length(self, n_frames):
        """Number of time steps left after the branch's conv/pool layers."""
        length = n_frames
        for layer in self.layers:
            if layer.kind == "conv1d" and layer.padding == "valid":
                length = length - layer.kernel_width + 1
            elif layer.kind == "maxpool1d":
                length = length // layer.stride
        return length

    def min_frames(self):
        """smallest input length producing at least one output step"""
        length = 1
        for layer in reversed(self.layers):
            if layer.kind == "maxpool1d":
                length = length * layer.stride
            elif layer.kind == "conv1d" and layer.padding == "valid":
                length = length + layer.kernel_width - 1
        return length


@dataclass(frozen=True)
class NetworkSpec:
    """Multi-branch network: per-input encoders fused before a dense trunk.

    :param branches: one :class:`BranchSpec` per named input.
    :param trunk: dense layers followed by one output layer.
    :param str task: ``classification`` or ``sequence_regression``.
    :param int n_classes: number of classes (classification only).
    """

    branches: tuple
    trunk: tuple
    task: str = "classification"
    n_classes: int = 2

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "trunk", tuple(self.trunk))
        if self.task not in TASKS:
            raise ConfigError(f"unknown task <{self.task}>")
        if not self.branches:
            raise ConfigError("network needs at least one branch")
        names = [b.input_name for b in self.branches]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate branch inputs in {names}")
        if not self.trunk or self.trunk[-1].kind != "output":
            raise ConfigError("trunk must end with an output layer")
        for layer in self.trunk[:-1]:
            if layer.kind != "dense":
                raise ConfigError(
                    f"trunk may only hold dense layers, found {layer.kind}")
        out = self.trunk[-1]
        if self.task == "classification":
            if self.n_classes < 2:
                raise ConfigError("classification needs at least 2 classes")
            if out.activation != "softmax" or out.units != self.n_classes:
                raise ConfigError(
                    "classification output must be a softmax with "
                    f"{self.n_classes} units")
        elif out.activation != "linear" or out.units != 1:
            raise ConfigError(
                "sequence regression output must be one linear unit")

    @property
    def input_names(self):
        return [b.input_name for b in self.branches]

    def branch(self, name):
        for branch in self.branches:
            if branch.input_name == name:
                return branch
        raise ConfigError(f"network has no branch named <{name}>")

    def output_length(self, n_frames):
        """Output steps of a sequence-regression network for ``n_frames``
        input frames on every branch."""
        return min(b.output_length(n_frames) for b in self.branches)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        """Canonical single-line serialization."""
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":"))

    @classmethod
    def from_dict(cls, data):
        try:
            branches = [
                BranchSpec(
                    input_name=b["input_name"],
                    n_features=int(b["n_features"]),
                    layers=[LayerSpec(**layer) for layer in b["layers"]])
                for b in data["branches"]]
            trunk = [LayerSpec(**layer) for layer in data["trunk"]]
            return cls(
                branches=branches,
                trunk=trunk,
                task=data.get("task", "classification"),
                n_classes=int(data.get("n_classes", 2)))
        except (KeyError, TypeError) as err:
            raise ConfigError(f"malformed network spec: {err}") from err

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


class Parameters:
    """Flat float64 parameter vector with a named index map.

    :param values: flat vector, length equal to the sum of the layout sizes.
    :param layout: ordered ``(name, shape)`` pairs.
    :param int seed: seed used at initialisation.
    """

    def __init__(self, values, layout, seed=None):
        self.layout = [(name, tuple(shape)) for name, shape in layout]
        self.index = {}
        start = 0
        for name, shape in self.layout:
            size = int(np.prod(shape))
            self.index[name] = slice(start, start + size)
            start += size
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.shape[0] != start:
            raise ConfigError(
                f"parameter vector has {values.shape[0]} values, "
                f"layout needs {start}")
        self.values = values
        self.seed = seed

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, name):
        shape = dict(self.layout)[name]
        return self.values[self.index[name]].reshape(shape)

    def __repr__(self):
        return f"Parameters(n={len(self)}, seed={self.seed})"

    def copy(self, values=None):
        values = self.values.copy() if values is None else values
        return Parameters(values, self.layout, seed=self.seed)

    def zeros_like(self):
        return np.zeros_like(self.values)

    def unflatten(self, vector):
        """Named views into ``vector`` using this index map."""
        return {
            name: vector[self.index[name]].reshape(shape)
            for name, shape in self.layout}


@dataclass
class GradientBundle:
    """Gradients w.r.t. every parameter and every input cell."""

    param_grads: np.ndarray
    input_grads: dict = field(default_factory=dict)


@dataclass
class Prediction:
    """Single-example network output.

    ``values`` holds the posterior vector for classification and the
    per-step sequence for regression.
    """

    values: np.ndarray
    task: str

    @property
    def label(self):
        if self.task != "classification":
            raise ConfigError("only classification predictions have labels")
        return int(np.argmax(self.values))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 100
    epochs: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.epochs < 0:
            raise ConfigError("epochs can't be negative")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("Adam betas must be in [0, 1)")
        if not self.epsilon > 0:
            raise ConfigError("Adam epsilon must be positive")
