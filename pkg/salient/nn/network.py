import logging

import numpy as np

from ..entities.audio import FeatureMatrix
from ..entities.network import GradientBundle, Parameters, Prediction
from ..exceptions import ConfigError, DataError, NumericError
from .. import losses
from .layers import Conv1D, MaxPool1D, build_layer

logger = logging.getLogger("salient.nn")


class Network:
    """Executable form of a :class:`NetworkSpec`.

    Branch encoders run independently on their named inputs; their LSTM
    outputs are concatenated (middle fusion) and passed through the dense
    trunk. Classification branches hand over the final hidden state,
    sequence regression the full hidden sequence.
    """

    def __init__(self, spec):
        self.spec = spec
        regression = spec.task == "sequence_regression"
        self.branch_layers = {}
        fused = 0
        for branch in spec.branches:
            layers = []
            n_in = branch.n_features
            last_lstm = max(
                i for i, layer in enumerate(branch.layers)
                if layer.kind == "lstm")
            for i, layer_spec in enumerate(branch.layers):
                name = f"{branch.input_name}/{layer_spec.kind}{i}"
                return_sequences = regression or i != last_lstm
                layer = build_layer(layer_spec, name, n_in, return_sequences)
                layers.append(layer)
                n_in = layer.n_out
            self.branch_layers[branch.input_name] = layers
            fused += n_in
        self.trunk_layers = []
        n_in = fused
        for i, layer_spec in enumerate(spec.trunk):
            name = f"trunk/{layer_spec.kind}{i}"
            layer = build_layer(layer_spec, name, n_in)
            self.trunk_layers.append(layer)
            n_in = layer.n_out

    @property
    def layers(self):
        for name in self.spec.input_names:
            yield from self.branch_layers[name]
        yield from self.trunk_layers

    @property
    def layout(self):
        return [shape for layer in self.layers
                for shape in layer.param_shapes()]

    def count_parameters(self):
        return int(sum(np.prod(shape) for _, shape in self.layout))

    def init(self, seed):
        rng = np.random.default_rng(seed)
        weights = {}
        for layer in self.layers:
            weights.update(layer.initialize(rng))
        values = np.concatenate([
            weights[name].reshape(-1) for name, _ in self.layout]
            or [np.zeros(0)])
        return Parameters(values, self.layout, seed=seed)

    def check_batch(self, batch):
        for branch in self.spec.branches:
            if branch.input_name not in batch:
                raise DataError(
                    f"missing input for branch <{branch.input_name}>")
            x = batch[branch.input_name]
            if x.ndim != 3:
                raise DataError(
                    f"branch <{branch.input_name}> expects (batch, time, "
                    f"band) input, got {x.ndim} axes")
            if x.shape[2] != branch.n_features:
                raise DataError(
                    f"branch <{branch.input_name}> band axis has "
                    f"{x.shape[2]} features, expected {branch.n_features}")
            if x.shape[1] < branch.min_frames():
                raise DataError(
                    f"branch <{branch.input_name}> time axis has "
                    f"{x.shape[1]} frames, needs at least "
                    f"{branch.min_frames()}")
        sizes = {batch[name].shape[0] for name in self.spec.input_names}
        if len(sizes) != 1:
            raise DataError(f"branches disagree on batch size: {sizes}")

    @staticmethod
    def _checked(y, layer):
        if not np.all(np.isfinite(y)):
            raise NumericError(f"non-finite values after layer <{layer.name}>")
        return y

    def forward(self, params, batch):
        """Run a batch through the network.

        :param Parameters params: network weights.
        :param dict batch: input name → (B, T, F) array.
        :return: tuple of outputs, (B, K) posteriors or (B, T') sequences,
            and the cache needed by :meth:`backward`.
        """
        self.check_batch(batch)
        weights = params.unflatten(params.values)
        caches = {}
        encoded = []
        for name in self.spec.input_names:
            h = np.asarray(batch[name], dtype=np.float64)
            branch_caches = []
            for layer in self.branch_layers[name]:
                h, cache = layer.forward(h, weights)
                self._checked(h, layer)
                branch_caches.append(cache)
            caches[name] = branch_caches
            encoded.append(h)
        self._check_lengths(encoded)
        widths = [e.shape[-1] for e in encoded]
        h = np.concatenate(encoded, axis=-1)
        trunk_caches = []
        for layer in self.trunk_layers:
            h, cache = layer.forward(h, weights)
            self._checked(h, layer)
            trunk_caches.append(cache)
        if self.spec.task == "sequence_regression":
            h = h[..., 0]
        return h, (caches, trunk_caches, widths)

    def _check_lengths(self, encoded):
        if self.spec.task == "sequence_regression":
            lengths = [e.shape[1] for e in encoded]
            if len(set(lengths)) != 1:
                raise DataError(
                    "fused branches produce different sequence lengths "
                    f"{dict(zip(self.spec.input_names, lengths))}")

    def predict(self, params, batch):
        """Outputs of :meth:`forward` without keeping any backward state.

        A convolution directly followed by max pooling is evaluated in
        pooled chunks, so long raw waveforms fit in memory.
        """
        self.check_batch(batch)
        weights = params.unflatten(params.values)
        encoded = []
        for name in self.spec.input_names:
            h = np.asarray(batch[name], dtype=np.float64)
            layers = self.branch_layers[name]
            i = 0
            while i < len(layers):
                layer = layers[i]
                following = layers[i + 1] if i + 1 < len(layers) else None
                if isinstance(layer, Conv1D) and \
                        isinstance(following, MaxPool1D):
                    h = layer.predict(h, weights, pool=following.spec.stride)
                    i += 2
                else:
                    h = layer.predict(h, weights)
                    i += 1
                self._checked(h, layer)
            encoded.append(h)
        self._check_lengths(encoded)
        h = np.concatenate(encoded, axis=-1)
        for layer in self.trunk_layers:
            h = self._checked(layer.predict(h, weights), layer)
        if self.spec.task == "sequence_regression":
            h = h[..., 0]
        return h

    def backward(self, params, cache, d_outputs):
        """Propagate output gradients back to parameters and inputs.

        :param d_outputs: gradient of a scalar w.r.t. the forward outputs.
        :return GradientBundle: parameter and per-branch input gradients.
        """
        caches, trunk_caches, widths = cache
        weights = params.unflatten(params.values)
        grads = {}
        dh = np.asarray(d_outputs, dtype=np.float64)
        if self.spec.task == "sequence_regression":
            dh = dh[..., None]
        for layer, layer_cache in zip(
                reversed(self.trunk_layers), reversed(trunk_caches)):
            dh, layer_grads = layer.backward(dh, layer_cache, weights)
            grads.update(layer_grads)
        splits = np.cumsum(widths)[:-1]
        input_grads = {}
        for name, dbranch in zip(
                self.spec.input_names, np.split(dh, splits, axis=-1)):
            for layer, layer_cache in zip(
                    reversed(self.branch_layers[name]),
                    reversed(caches[name])):
                dbranch, layer_grads = layer.backward(
                    dbranch, layer_cache, weights)
                grads.update(layer_grads)
            input_grads[name] = dbranch
        flat = params.zeros_like()
        for name, view in params.unflatten(flat).items():
            if name in grads:
                view[...] = grads[name]
        for name, dx in input_grads.items():
            if not np.all(np.isfinite(dx)):
                raise NumericError(
                    f"non-finite input gradient for branch <{name}>")
        return GradientBundle(flat, input_grads)


def _as_batch(inputs):
    """Normalise a name → FeatureMatrix (or array) map into a batch.

    :return: tuple of the batch dict and whether a single example was given.
    """
    batch = {}
    single = None
    for name, value in inputs.items():
        if isinstance(value, FeatureMatrix):
            value = value.values[None]
            is_single = True
        else:
            value = np.asarray(value, dtype=np.float64)
            is_single = value.ndim == 2
            if is_single:
                value = value[None]
        if single is None:
            single = is_single
        batch[name] = value
    return batch, bool(single)


def stack_examples(inputs_list, names):
    """Stack per-example input maps into one batch; frame counts must agree."""
    batch = {}
    for name in names:
        arrays = [
            inputs[name].values if isinstance(inputs[name], FeatureMatrix)
            else np.asarray(inputs[name]) for inputs in inputs_list]
        lengths = {a.shape for a in arrays}
        if len(lengths) != 1:
            raise DataError(
                f"examples for branch <{name}> have differing shapes "
                f"{sorted(lengths)}")
        batch[name] = np.stack(arrays)
    return batch


def align_sequences(output, target):
    """Truncate a predicted and a target sequence to their common length."""
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    n = min(output.shape[-1], target.shape[0])
    return output[..., :n], target[:n]


def count_parameters(spec):
    """Exact number of trainable scalars of ``spec``."""
    return Network(spec).count_parameters()


def output_length(spec, n_frames):
    """Sequence-regression output steps for inputs of ``n_frames`` frames."""
    return spec.output_length(n_frames)


def init(spec, seed):
    """Glorot-uniform weights, zero biases, LSTM forget-gate bias of 1."""
    return Network(spec).init(seed)


def forward(spec, params, inputs):
    """Predict one example (or a batch given as arrays).

    :param dict inputs: input name → :class:`FeatureMatrix`; binding is by
        name so the order of the map is irrelevant.
    :return: :class:`Prediction` for a single example, else the raw
        output array.
    """
    batch, single = _as_batch(inputs)
    outputs = Network(spec).predict(params, batch)
    if single:
        return Prediction(outputs[0], spec.task)
    return outputs


def target_gradients(spec, loss, outputs, targets, reduction):
    if loss.task != spec.task:
        raise ConfigError(
            f"loss <{loss.identifier}> doesn't apply to {spec.task}")
    if len(targets) != outputs.shape[0]:
        raise DataError(
            f"{len(targets)} targets given for {outputs.shape[0]} examples")
    if spec.task == "classification":
        values, d_outputs = losses.batch_loss(loss, outputs, targets)
    else:
        values = np.empty(outputs.shape[0])
        d_outputs = np.zeros_like(outputs)
        for b, (output, target) in enumerate(zip(outputs, targets)):
            out, tgt = align_sequences(output, target)
            values[b] = losses.loss_value(loss, out, tgt)
            d_outputs[b, :out.shape[0]] = losses.loss_grad(loss, out, tgt)
    if reduction == "mean":
        return values.mean(), d_outputs / outputs.shape[0]
    return values.sum(), d_outputs


def backward(spec, params, inputs, loss, target, reduction="mean"):
    """Loss value and exact gradients w.r.t. parameters and inputs.

    :param inputs: single example map or batch map of (B, T, F) arrays.
    :param target: class index / sequence, or a list of them for a batch.
    :param str reduction: ``mean`` or ``sum`` over the batch.
    :return: tuple ``(loss_value, GradientBundle)``.
    """
    batch, single = _as_batch(inputs)
    targets = [target] if single else list(target)
    network = Network(spec)
    outputs, cache = network.forward(params, batch)
    value, d_outputs = target_gradients(
        spec, loss, outputs, targets, reduction)
    if not np.isfinite(value):
        raise NumericError("loss is not finite")
    bundle = network.backward(params, cache, d_outputs)
    if single:
        bundle = GradientBundle(bundle.param_grads, {
            k: v[0] for k, v in bundle.input_grads.items()})
    return float(value), bundle


def unit_seeds(spec, outputs, unit):
    """Output gradient selecting one scalar per example.

    :param unit: class index, ``"sum"`` (sum over time for sequences) or
        one such selector per example.
    """
    batch = outputs.shape[0]
    units = list(unit) if isinstance(unit, (list, tuple, np.ndarray)) \
        else [unit] * batch
    if len(units) != batch:
        raise ConfigError(f"{len(units)} units given for {batch} examples")
    seeds = np.zeros_like(outputs)
    for b, u in enumerate(units):
        if spec.task == "classification":
            if isinstance(u, str) or not 0 <= int(u) < spec.n_classes:
                raise ConfigError(
                    f"invalid output unit <{u}> for {spec.n_classes} "
                    "classes")
            seeds[b, int(u)] = 1.0
        else:
            if u != "sum":
                raise ConfigError(
                    f"sequence outputs only support the 'sum' unit, "
                    f"got <{u}>")
            seeds[b] = 1.0
    return seeds


def output_gradient(spec, params, inputs, unit):
    """Gradient of one selected output scalar w.r.t. the inputs.

    No target is needed. For classification ``unit`` is a class index
    (the posterior of that class is differentiated), for sequence
    regression it must be ``"sum"``.
    """
    batch, single = _as_batch(inputs)
    network = Network(spec)
    outputs, cache = network.forward(params, batch)
    bundle = network.backward(params, cache, unit_seeds(spec, outputs, unit))
    if single:
        bundle = GradientBundle(bundle.param_grads, {
            k: v[0] for k, v in bundle.input_grads.items()})
    return bundle
