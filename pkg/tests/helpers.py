import numpy as np

from salient.entities.ensemble import Ensemble
from salient.entities.network import BranchSpec, LayerSpec, NetworkSpec
from salient.losses import LossSpec
from salient.nn.network import init


def conv_lstm_branch(input_name, n_features, filters=4, width=1, cells=5,
                     activation="tanh", padding="valid", pool=None):
    layers = [LayerSpec.conv1d(filters, width, activation, padding)]
    if pool:
        layers.append(LayerSpec.maxpool1d(pool))
    layers.append(LayerSpec.lstm(cells))
    return BranchSpec(input_name, n_features, layers)


def classifier_spec(n_features=6, input_name="spect", cells=5, filters=4,
                    width=1, pool=None, n_classes=2):
    return NetworkSpec(
        [conv_lstm_branch(input_name, n_features, filters, width, cells,
                          pool=pool)],
        [LayerSpec.dense(6, "tanh"), LayerSpec.output(n_classes, "softmax")],
        task="classification",
        n_classes=n_classes)


def regressor_spec(n_features=5, input_name="spect", cells=5, filters=4,
                   width=1, padding="valid"):
    return NetworkSpec(
        [conv_lstm_branch(input_name, n_features, filters, width, cells,
                          padding=padding)],
        [LayerSpec.dense(6, "tanh"), LayerSpec.output(1, "linear")],
        task="sequence_regression")


def untrained_ensemble(spec, n=3, loss=LossSpec(), mask=None):
    seeds = list(range(n))
    return Ensemble(spec, [init(spec, s) for s in seeds], seeds, loss,
                    mask=mask)


def central_difference(function, x, indices, eps=1e-5):
    """Numerical gradient of ``function`` at the flat ``indices`` of ``x``.

    ``x`` is perturbed in place and restored.
    """
    flat = x.reshape(-1)
    grads = []
    for i in indices:
        original = flat[i]
        flat[i] = original + eps
        plus = function()
        flat[i] = original - eps
        minus = function()
        flat[i] = original
        grads.append((plus - minus) / (2 * eps))
    return np.array(grads)
