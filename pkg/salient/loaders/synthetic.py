"""Seeded synthetic datasets whose informative bands are known.

The planted / driver band sets are stored in the dataset metadata only.
"""
import numpy as np
from scipy import signal

from ..entities.audio import FeatureMatrix
from ..entities.dataset import Dataset, LabeledExample
from ..exceptions import ConfigError

FRAME_RATE = 100.0
SPLIT_FRACTIONS = (0.6, 0.2, 0.2)


def _check_bands(bands, n_bands, what):
    bands = sorted({int(b) for b in bands})
    if not bands:
        raise ConfigError(f"{what} bands can't be empty")
    if bands[0] < 0 or bands[-1] >= n_bands:
        raise ConfigError(
            f"{what} bands {bands} out of range for {n_bands} bands")
    return bands


def _split_sizes(n_examples):
    if n_examples < 3:
        raise ConfigError("synthetic datasets need at least 3 examples")
    n_train = int(round(SPLIT_FRACTIONS[0] * n_examples))
    n_dev = max(1, int(round(SPLIT_FRACTIONS[1] * n_examples)))
    return n_train, n_dev


def _labels(n_bands):
    return [f"band_{i}" for i in range(n_bands)]


def _split(examples, n_examples):
    n_train, n_dev = _split_sizes(n_examples)
    return {
        "train": examples[:n_train],
        "dev": examples[n_train:n_train + n_dev],
        "test": examples[n_train + n_dev:],
    }


def synth_classification(
        seed=0,
        n_examples=400,
        n_frames=24,
        n_bands=64,
        planted=tuple(range(10)),
        effect_size=2.0,
        input_name="spect"):
    """Two balanced classes differing by a mean shift on planted bands.

    Cells are drawn from N(0, 1); class 1 adds ``effect_size`` on the
    planted bands. Labels alternate before the 60/20/20 split so every
    split stays balanced.
    """
    planted = _check_bands(planted, n_bands, "planted")
    if effect_size < 0:
        raise ConfigError("effect size must be non-negative")
    _split_sizes(n_examples)
    rng = np.random.default_rng(seed)
    cells = rng.standard_normal((n_examples, n_frames, n_bands))
    labels = np.arange(n_examples) % 2
    cells[np.ix_(labels == 1, np.arange(n_frames), planted)] += effect_size
    band_labels = _labels(n_bands)
    examples = [
        LabeledExample(
            f"cls_{i:05d}",
            {input_name: FeatureMatrix(cells[i], band_labels, FRAME_RATE)},
            int(labels[i]))
        for i in range(n_examples)]
    metadata = dict(
        source="synth_classification", seed=seed, planted_bands=planted,
        effect_size=float(effect_size))
    return Dataset("classification", _split(examples, n_examples), metadata,
                   ["class_0", "class_1"])


def synth_regression(
        seed=0,
        n_examples=200,
        n_frames=50,
        n_bands=16,
        driver_bands=(0, 1),
        smoothing=5,
        offset=5.0,
        scale=3.0,
        input_name="spect"):
    """Sequences whose target is a smoothed sum of driver bands.

    ``target[t] = offset + scale * mean(s[t - smoothing + 1 .. t])`` with
    ``s`` the per-frame sum over the driver bands. The smoothing is causal.
    """
    driver_bands = _check_bands(driver_bands, n_bands, "driver")
    if smoothing < 1:
        raise ConfigError("smoothing window must be at least 1 frame")
    _split_sizes(n_examples)
    rng = np.random.default_rng(seed)
    cells = rng.standard_normal((n_examples, n_frames, n_bands))
    window = np.full(smoothing, 1.0 / smoothing)
    band_labels = _labels(n_bands)
    examples = []
    for i in range(n_examples):
        drive = cells[i][:, driver_bands].sum(axis=1)
        target = offset + scale * signal.lfilter(window, [1.0], drive)
        examples.append(LabeledExample(
            f"reg_{i:05d}",
            {input_name: FeatureMatrix(cells[i], band_labels, FRAME_RATE)},
            target))
    metadata = dict(
        source="synth_regression", seed=seed, driver_bands=driver_bands,
        smoothing=smoothing, offset=float(offset), scale=float(scale))
    return Dataset("sequence_regression", _split(examples, n_examples),
                   metadata)


def band_drive(example, driver_bands, input_name="spect"):
    """Per-frame sum over ``driver_bands``, the unsmoothed target source."""
    return example.inputs[input_name].values[:, list(driver_bands)].sum(
        axis=1)
