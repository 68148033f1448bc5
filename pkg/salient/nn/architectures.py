"""Ready-made network specifications.

``msc``: two 64-filter convolutions, 100 LSTM cells, 100 ReLU units and a
softmax, for utterance classification.
``breathing_raw``: three convolutions (64-128-256 filters, widths 8-6-6)
each followed by max pooling with strides 10-8-8 over the raw waveform,
100 LSTM cells, 100 ReLU units and one linear output per step.
``breathing_spectral``: the ``msc`` encoder with a per-step linear output.
"""
from ..entities.network import BranchSpec, LayerSpec, NetworkSpec
from ..exceptions import ConfigError

ARCHITECTURES = ("msc", "breathing_raw", "breathing_spectral")


def conv_lstm_layers(filters=64, kernel_widths=(1, 1), lstm_cells=100):
    layers = [LayerSpec.conv1d(filters, width) for width in kernel_widths]
    layers.append(LayerSpec.lstm(lstm_cells))
    return layers


def raw_audio_layers(
        filters=(64, 128, 256),
        kernel_widths=(8, 6, 6),
        strides=(10, 8, 8),
        lstm_cells=100):
    if not len(filters) == len(kernel_widths) == len(strides):
        raise ConfigError(
            "filters, kernel widths and strides need the same length")
    layers = []
    for n, width, stride in zip(filters, kernel_widths, strides):
        layers.append(LayerSpec.conv1d(n, width, padding="same"))
        layers.append(LayerSpec.maxpool1d(stride))
    layers.append(LayerSpec.lstm(lstm_cells))
    return layers


def trunk_layers(task, dense_units=100, n_classes=2):
    if task == "classification":
        out = LayerSpec.output(n_classes, "softmax")
    else:
        out = LayerSpec.output(1, "linear")
    return [LayerSpec.dense(dense_units), out]


def msc_spec(
        n_features,
        input_name="spect",
        n_classes=2,
        filters=64,
        kernel_widths=(1, 1),
        lstm_cells=100,
        dense_units=100):
    branch = BranchSpec(
        input_name, n_features,
        conv_lstm_layers(filters, kernel_widths, lstm_cells))
    return NetworkSpec(
        [branch],
        trunk_layers("classification", dense_units, n_classes),
        task="classification",
        n_classes=n_classes)


def breathing_raw_spec(input_name="audio", lstm_cells=100, dense_units=100):
    branch = BranchSpec(
        input_name, 1, raw_audio_layers(lstm_cells=lstm_cells))
    return NetworkSpec(
        [branch],
        trunk_layers("sequence_regression", dense_units),
        task="sequence_regression")


def breathing_spectral_spec(
        n_features,
        input_name="spect",
        filters=64,
        kernel_widths=(1, 1),
        lstm_cells=100,
        dense_units=100):
    branch = BranchSpec(
        input_name, n_features,
        conv_lstm_layers(filters, kernel_widths, lstm_cells))
    return NetworkSpec(
        [branch],
        trunk_layers("sequence_regression", dense_units),
        task="sequence_regression")


def fusion_spec(
        inputs,
        task="classification",
        n_classes=2,
        filters=64,
        kernel_widths=(1, 1),
        lstm_cells=100,
        dense_units=100):
    """Middle fusion: one conv+LSTM encoder per input, shared dense trunk.

    :param dict inputs: input name → number of feature bands, in branch
        order.
    """
    if not inputs:
        raise ConfigError("fusion needs at least one input")
    branches = [
        BranchSpec(name, n_features,
                   conv_lstm_layers(filters, kernel_widths, lstm_cells))
        for name, n_features in inputs.items()]
    return NetworkSpec(
        branches,
        trunk_layers(task, dense_units, n_classes),
        task=task,
        n_classes=n_classes)


def build_spec(
        architecture,
        n_features,
        task="classification",
        n_classes=2,
        input_name="spect",
        **kwargs):
    """Specification for one of the named architectures."""
    if architecture == "msc":
        if task != "classification":
            raise ConfigError("the msc architecture is a classifier")
        return msc_spec(
            n_features, input_name=input_name, n_classes=n_classes, **kwargs)
    if architecture == "breathing_spectral":
        return breathing_spectral_spec(
            n_features, input_name=input_name, **kwargs)
    if architecture == "breathing_raw":
        if n_features != 1:
            raise ConfigError(
                "breathing_raw consumes a single waveform channel")
        return breathing_raw_spec(
            input_name=input_name,
            lstm_cells=kwargs.get("lstm_cells", 100),
            dense_units=kwargs.get("dense_units", 100))
    raise ConfigError(f"unknown architecture <{architecture}>")
