"""Run configuration: nested YAML sections with dotted overrides."""
import copy
import logging
import pathlib

import yaml

from .dsp.spectral import FEATURE_KINDS, FeatureExtractor
from .entities.audio import PreEmphasisConfig, SpectrogramConfig
from .entities.network import TASKS, TrainConfig
from .exceptions import ConfigError
from .losses import LossSpec
from .nn.architectures import build_spec, fusion_spec
from .selection.masking import SELECTED_SUFFIX
from .selection.sffs import ProxyConfig

logger = logging.getLogger("salient")

DEFAULTS = {
    "task": "classification",
    "features": {
        "kind": "logmel",
        "input_name": "spect",
        "inputs": {},
        "sample_rate": 16000,
        "n_fft": 512,
        "hop": 160,
        "n_mel": 128,
        "fmin": 20.0,
        "fmax": 8000.0,
        "log_floor": 1e-10,
        "preemphasis": 0.97,
        "butterworth_order": 5,
        "butterworth_cutoff": 400.0,
        "ratio_boundary": 400.0,
        "expected_steps": None,
    },
    "network": {
        "architecture": "msc",
        "n_classes": 2,
        "filters": 64,
        "kernel_widths": [1, 1],
        "lstm_cells": 100,
        "dense_units": 100,
        "fusion_inputs": [],
    },
    "train": {
        "learning_rate": 0.001,
        "batch_size": 100,
        "epochs": 10,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon": 1e-8,
        "merge_dev": False,
    },
    "ensemble": {
        "size": 10,
        "base_seed": 0,
        "n_jobs": 1,
    },
    "selection": {
        "kind": "majority",
        "source": "output",
        "n": 10,
        "random_seed": 0,
        "proxy_alpha": 1e-3,
        "proxy_max_iter": 50,
        "n_jobs": 1,
    },
    "loss": {
        "id": "xent",
    },
    "synth": {
        "seed": 0,
        "n_examples": 400,
        "n_frames": 24,
        "n_bands": 64,
        "planted": list(range(10)),
        "effect_size": 2.0,
        "driver_bands": [0, 1],
        "smoothing": 5,
        "offset": 5.0,
        "scale": 3.0,
    },
    "eval": {
        "split": "dev",
    },
    "bench": {
        "repetitions": 5,
        "include_features": True,
        "max_examples": 50,
        "ensembles": [],
    },
    "paths": {
        "manifest": None,
        "dataset": None,
        "ensemble": None,
        "mask": None,
    },
}

SELECTION_KINDS = ("majority", "lowest", "random", "least_important", "sffs")
# sections whose keys are chosen by the user
OPEN_SECTIONS = (("features", "inputs"),)


def parse_override(item):
    """Split ``section.key=value``; the value is read as a YAML scalar."""
    key, sep, value = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override <{item}> isn't of the form key=value")
    try:
        parsed = yaml.safe_load(value) if value.strip() else None
    except yaml.YAMLError as err:
        raise ConfigError(f"can't parse value of <{item}>: {err}") from err
    return key.strip().split("."), parsed


def _coerce(path, default, value):
    name = ".".join(path)
    if value is None or default is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"<{name}> must be true or false")
        return value
    if isinstance(default, float):
        if isinstance(value, str):
            # YAML 1.1 reads exponents without a dot, e.g. 1e-3, as text
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"<{name}> must be a number") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"<{name}> must be a number")
        return float(value)
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"<{name}> must be an integer")
        return value
    if isinstance(default, list) and not isinstance(value, list):
        raise ConfigError(f"<{name}> must be a list")
    return value


def _merge(base, update, path=()):
    for key, value in update.items():
        if key not in base:
            raise ConfigError(
                f"unknown configuration key <{'.'.join(path + (key,))}>")
        if path + (key,) in OPEN_SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(
                    f"<{'.'.join(path + (key,))}> must map names to values")
            base[key] = {str(k): v for k, v in value.items()}
        elif isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(
                    f"<{'.'.join(path + (key,))}> is a section")
            _merge(base[key], value, path + (key,))
        else:
            base[key] = _coerce(path + (key,), _default(path + (key,)),
                                value)


def _default(path):
    node = DEFAULTS
    for key in path:
        node = node[key]
    return node


class RunConfig:
    """Effective configuration of a pipeline run.

    :param dict values: nested sections; missing keys take the defaults,
        unknown keys are rejected.
    """

    def __init__(self, values=None):
        self.values = copy.deepcopy(DEFAULTS)
        _merge(self.values, values or {})
        self.validate()

    @classmethod
    def from_file(cls, path=None, overrides=(), seed=None):
        """Read a YAML file (optional), then apply ``--set`` overrides.

        :param overrides: ``section.key=value`` strings.
        :param int seed: overrides every seed of the run.
        """
        values = {}
        if path is not None:
            path = pathlib.Path(path)
            if not path.is_file():
                raise ConfigError(f"configuration file <{path}> not found")
            try:
                values = yaml.safe_load(path.read_text()) or {}
            except yaml.YAMLError as err:
                raise ConfigError(f"can't parse <{path}>: {err}") from err
            if not isinstance(values, dict):
                raise ConfigError(f"<{path}> must hold a mapping")
        for item in overrides:
            keys, value = parse_override(item)
            node = values
            for key in keys[:-1]:
                node = node.setdefault(key, {})
                if not isinstance(node, dict):
                    raise ConfigError(f"<{item}> overrides a scalar section")
            node[keys[-1]] = value
        if seed is not None:
            for section, key in (("ensemble", "base_seed"), ("synth", "seed"),
                                 ("selection", "random_seed")):
                values.setdefault(section, {})[key] = int(seed)
        return cls(values)

    def __getitem__(self, section):
        return self.values[section]

    def validate(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task <{self.task}>")
        if self.loss_spec().task != self.task:
            raise ConfigError(
                f"loss <{self['loss']['id']}> doesn't fit the "
                f"{self.task} task")
        if self["selection"]["kind"] not in SELECTION_KINDS:
            raise ConfigError(
                f"unknown selection kind <{self['selection']['kind']}>")
        if self["ensemble"]["size"] < 1:
            raise ConfigError("ensemble.size must be at least 1")
        self.train_config()
        self.spectrogram_config()
        self.preemphasis_config()
        self._validate_inputs()

    def _validate_inputs(self):
        f = self["features"]
        for name, kind in self.input_kinds().items():
            if kind not in FEATURE_KINDS:
                raise ConfigError(
                    f"unknown feature kind <{kind}> for input <{name}>")
            if name.endswith(SELECTED_SUFFIX):
                raise ConfigError(
                    f"input names can't end with <{SELECTED_SUFFIX}>: {name}")
        if f["inputs"] and f["input_name"] not in f["inputs"]:
            raise ConfigError(
                f"features.input_name <{f['input_name']}> is not one of "
                f"features.inputs {sorted(f['inputs'])}")
        branches = self["network"]["fusion_inputs"]
        if branches and (len(branches) < 2
                         or len(set(branches)) != len(branches)):
            raise ConfigError(
                "network.fusion_inputs needs at least two distinct names")

    @property
    def task(self):
        return self.values["task"]

    def spectrogram_config(self):
        f = self["features"]
        return SpectrogramConfig(
            n_fft=f["n_fft"], hop=f["hop"], n_mel=f["n_mel"],
            fmin=f["fmin"], fmax=f["fmax"], log_floor=f["log_floor"])

    def preemphasis_config(self):
        return PreEmphasisConfig(self["features"]["preemphasis"])

    def input_kinds(self):
        """Input name → feature kind of every extracted input."""
        f = self["features"]
        return dict(f["inputs"]) or {f["input_name"]: f["kind"]}

    def feature_extractor(self, bands=None, kind=None):
        f = self["features"]
        return FeatureExtractor(
            kind=kind or f["kind"],
            spectrogram=self.spectrogram_config(),
            preemphasis=self.preemphasis_config(),
            butterworth_order=f["butterworth_order"],
            butterworth_cutoff=f["butterworth_cutoff"],
            ratio_boundary=f["ratio_boundary"],
            bands=None if bands is None else tuple(bands))

    def feature_extractors(self):
        """One extractor per input of :meth:`input_kinds`."""
        return {name: self.feature_extractor(kind=kind)
                for name, kind in self.input_kinds().items()}

    def train_config(self):
        t = self["train"]
        return TrainConfig(
            learning_rate=t["learning_rate"],
            batch_size=t["batch_size"],
            epochs=t["epochs"],
            beta1=t["beta1"],
            beta2=t["beta2"],
            epsilon=t["epsilon"])

    def loss_spec(self):
        return LossSpec.parse(self["loss"]["id"])

    def proxy_config(self):
        s = self["selection"]
        return ProxyConfig(
            alpha=s["proxy_alpha"], max_iter=s["proxy_max_iter"],
            random_state=s["random_seed"])

    def _network_kwargs(self):
        n = self["network"]
        kwargs = dict(lstm_cells=n["lstm_cells"], dense_units=n["dense_units"])
        if n["architecture"] != "breathing_raw":
            kwargs.update(filters=n["filters"],
                          kernel_widths=tuple(n["kernel_widths"]))
        return kwargs

    def network_spec(self, n_features, input_name=None):
        """Single-input network of the configured architecture."""
        return build_spec(
            self["network"]["architecture"],
            n_features,
            task=self.task,
            n_classes=self["network"]["n_classes"],
            input_name=input_name or self["features"]["input_name"],
            **self._network_kwargs())

    def fusion_branches(self):
        """Branch names of the fusion network, in order.

        Defaults to the configured input and its ``_selected`` view.
        """
        name = self["features"]["input_name"]
        return ([str(b) for b in self["network"]["fusion_inputs"]]
                or [name, name + SELECTED_SUFFIX])

    def fusion_spec(self, inputs):
        """Middle-fusion network.

        :param dict inputs: branch name → number of input bands.
        """
        n = self["network"]
        return fusion_spec(
            inputs,
            task=self.task,
            n_classes=n["n_classes"],
            filters=n["filters"],
            kernel_widths=tuple(n["kernel_widths"]),
            lstm_cells=n["lstm_cells"],
            dense_units=n["dense_units"])

    def to_yaml(self):
        return yaml.safe_dump(self.values, sort_keys=True)

    def save(self, path):
        """Write the effective configuration (run provenance)."""
        pathlib.Path(path).write_text(self.to_yaml())


def template():
    """Default configuration as YAML text."""
    return yaml.safe_dump(DEFAULTS, sort_keys=False)
