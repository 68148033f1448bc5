"""Layers with exact forward and reverse-mode passes.

Sequence tensors are shaped (batch, time, channels). Every layer exposes
``param_shapes()``, ``forward(x, weights)`` returning ``(y, cache)`` and
``backward(dy, cache, weights)`` returning ``(dx, grads)`` where ``grads``
maps parameter names to arrays.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

# output frames per convolution chunk at inference time
CHUNK_FRAMES = 16384


def sigmoid(z):
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    ez = np.exp(z[~positive])
    out[~positive] = ez / (1.0 + ez)
    return out


def softmax(z):
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def activate(z, activation):
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "tanh":
        return np.tanh(z)
    if activation == "sigmoid":
        return sigmoid(z)
    if activation == "softmax":
        return softmax(z)
    return z


def activation_backward(dy, z, y, activation):
    """Gradient w.r.t. the pre-activation ``z``."""
    if activation == "relu":
        return dy * (z > 0)
    if activation == "tanh":
        return dy * (1.0 - y ** 2)
    if activation == "sigmoid":
        return dy * y * (1.0 - y)
    if activation == "softmax":
        return y * (dy - np.sum(dy * y, axis=-1, keepdims=True))
    return dy


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base layer; ``name`` prefixes the layer's parameter names."""

    def __init__(self, spec, name, n_in):
        self.spec = spec
        self.name = name
        self.n_in = n_in

    @property
    def n_out(self):
        return self.spec.units

    def param_shapes(self):
        return []

    def key(self, param):
        return f"{self.name}/{param}"

    def initialize(self, rng):
        return {}

    def forward(self, x, weights):
        raise NotImplementedError

    def backward(self, dy, cache, weights):
        raise NotImplementedError

    def predict(self, x, weights):
        """Inference output only, nothing kept for a backward pass."""
        y, _ = self.forward(x, weights)
        return y


class Conv1D(Layer):

    @property
    def padding(self):
        width = self.spec.kernel_width
        if self.spec.padding == "same":
            return (width - 1) // 2, width // 2
        return 0, 0

    def param_shapes(self):
        width = self.spec.kernel_width
        return [
            (self.key("kernel"), (width, self.n_in, self.spec.units)),
            (self.key("bias"), (self.spec.units,))]

    def initialize(self, rng):
        width = self.spec.kernel_width
        shape = (width, self.n_in, self.spec.units)
        return {
            self.key("kernel"): glorot_uniform(
                rng, shape, width * self.n_in, width * self.spec.units),
            self.key("bias"): np.zeros(self.spec.units)}

    def forward(self, x, weights):
        kernel = weights[self.key("kernel")]
        width = self.spec.kernel_width
        left, right = self.padding
        if left or right:
            x = np.pad(x, ((0, 0), (left, right), (0, 0)))
        batch, n_frames, channels = x.shape
        steps = n_frames - width + 1
        # (B, T', C, w) -> (B, T', w, C) to match the kernel layout
        windows = sliding_window_view(x, width, axis=1).transpose(0, 1, 3, 2)
        cols = windows.reshape(batch * steps, width * channels)
        z = cols @ kernel.reshape(width * channels, -1)
        z += weights[self.key("bias")]
        z = z.reshape(batch, steps, -1)
        y = activate(z, self.spec.activation)
        return y, (cols, z, y, x.shape)

    def backward(self, dy, cache, weights):
        cols, z, y, padded_shape = cache
        kernel = weights[self.key("kernel")]
        width = self.spec.kernel_width
        batch, n_frames, channels = padded_shape
        steps = n_frames - width + 1
        dz = activation_backward(dy, z, y, self.spec.activation)
        dz = dz.reshape(batch * steps, -1)
        grads = {
            self.key("kernel"): (cols.T @ dz).reshape(kernel.shape),
            self.key("bias"): dz.sum(axis=0)}
        dcols = (dz @ kernel.reshape(width * channels, -1).T).reshape(
            batch, steps, width, channels)
        dx = np.zeros(padded_shape)
        for k in range(width):
            dx[:, k:k + steps, :] += dcols[:, :, k, :]
        left, right = self.padding
        if left or right:
            dx = dx[:, left:n_frames - right, :]
        return dx, grads

    def predict(self, x, weights, pool=1):
        """Convolution accumulated one kernel tap at a time.

        Output frames are computed in chunks of at most ``CHUNK_FRAMES``;
        with ``pool > 1`` every chunk is max-pooled before it is stored, so
        the full-rate activation never exists for the whole input.
        """
        kernel = weights[self.key("kernel")]
        bias = weights[self.key("bias")]
        width = self.spec.kernel_width
        left, right = self.padding
        if left or right:
            x = np.pad(x, ((0, 0), (left, right), (0, 0)))
        batch, n_frames, _ = x.shape
        steps = (n_frames - width + 1) // pool
        out = np.empty((batch, steps, self.spec.units))
        chunk = max(1, CHUNK_FRAMES // pool)
        for start in range(0, steps, chunk):
            stop = min(start + chunk, steps)
            first, last = start * pool, stop * pool
            z = np.zeros((batch, last - first, self.spec.units)) + bias
            for k in range(width):
                z += x[:, first + k:last + k, :] @ kernel[k]
            y = activate(z, self.spec.activation)
            if pool > 1:
                y = y.reshape(batch, stop - start, pool, -1).max(axis=2)
            out[:, start:stop] = y
        return out


class MaxPool1D(Layer):
    """Non-overlapping max pooling; trailing frames that don't fill a
    window are dropped."""

    @property
    def n_out(self):
        return self.n_in

    def forward(self, x, weights):
        stride = self.spec.stride
        batch, n_frames, channels = x.shape
        steps = n_frames // stride
        windows = x[:, :steps * stride, :].reshape(
            batch, steps, stride, channels)
        argmax = windows.argmax(axis=2)
        y = np.take_along_axis(windows, argmax[:, :, None, :], axis=2)
        return y[:, :, 0, :], (argmax, x.shape)

    def predict(self, x, weights):
        stride = self.spec.stride
        batch, n_frames, channels = x.shape
        steps = n_frames // stride
        return x[:, :steps * stride, :].reshape(
            batch, steps, stride, channels).max(axis=2)

    def backward(self, dy, cache, weights):
        argmax, input_shape = cache
        stride = self.spec.stride
        batch, n_frames, channels = input_shape
        steps = n_frames // stride
        dwindows = np.zeros((batch, steps, stride, channels))
        np.put_along_axis(
            dwindows, argmax[:, :, None, :], dy[:, :, None, :], axis=2)
        dx = np.zeros(input_shape)
        dx[:, :steps * stride, :] = dwindows.reshape(
            batch, steps * stride, channels)
        return dx, {}


class LSTM(Layer):
    """Standard LSTM without peepholes, gate order (i, f, g, o).

    :param bool return_sequences: emit every hidden state instead of the
        last one.
    """

    def __init__(self, spec, name, n_in, return_sequences=True):
        super().__init__(spec, name, n_in)
        self.return_sequences = return_sequences

    def param_shapes(self):
        cells = self.spec.units
        return [
            (self.key("kernel"), (self.n_in, 4 * cells)),
            (self.key("recurrent"), (cells, 4 * cells)),
            (self.key("bias"), (4 * cells,))]

    def initialize(self, rng):
        cells = self.spec.units
        bias = np.zeros(4 * cells)
        bias[cells:2 * cells] = 1.0
        return {
            self.key("kernel"): glorot_uniform(
                rng, (self.n_in, 4 * cells), self.n_in, 4 * cells),
            self.key("recurrent"): glorot_uniform(
                rng, (cells, 4 * cells), cells, 4 * cells),
            self.key("bias"): bias}

    def forward(self, x, weights):
        kernel = weights[self.key("kernel")]
        recurrent = weights[self.key("recurrent")]
        bias = weights[self.key("bias")]
        cells = self.spec.units
        batch, n_frames, _ = x.shape
        projected = x @ kernel + bias
        gates = np.empty((batch, n_frames, 4 * cells))
        cell = np.zeros((batch, n_frames, cells))
        cell_tanh = np.zeros((batch, n_frames, cells))
        hidden = np.zeros((batch, n_frames, cells))
        h = np.zeros((batch, cells))
        c = np.zeros((batch, cells))
        for t in range(n_frames):
            z = projected[:, t] + h @ recurrent
            g = np.empty_like(z)
            g[:, :2 * cells] = sigmoid(z[:, :2 * cells])
            g[:, 2 * cells:3 * cells] = np.tanh(z[:, 2 * cells:3 * cells])
            g[:, 3 * cells:] = sigmoid(z[:, 3 * cells:])
            c = g[:, cells:2 * cells] * c + (
                g[:, :cells] * g[:, 2 * cells:3 * cells])
            ct = np.tanh(c)
            h = g[:, 3 * cells:] * ct
            gates[:, t] = g
            cell[:, t] = c
            cell_tanh[:, t] = ct
            hidden[:, t] = h
        y = hidden if self.return_sequences else hidden[:, -1]
        return y, (x, gates, cell, cell_tanh, hidden)

    def predict(self, x, weights):
        kernel = weights[self.key("kernel")]
        recurrent = weights[self.key("recurrent")]
        bias = weights[self.key("bias")]
        cells = self.spec.units
        batch, n_frames, _ = x.shape
        hidden = np.empty((batch, n_frames, cells)) \
            if self.return_sequences else None
        h = np.zeros((batch, cells))
        c = np.zeros((batch, cells))
        for t in range(n_frames):
            z = x[:, t] @ kernel + bias + h @ recurrent
            i = sigmoid(z[:, :cells])
            f = sigmoid(z[:, cells:2 * cells])
            c = f * c + i * np.tanh(z[:, 2 * cells:3 * cells])
            h = sigmoid(z[:, 3 * cells:]) * np.tanh(c)
            if hidden is not None:
                hidden[:, t] = h
        return hidden if self.return_sequences else h

    def backward(self, dy, cache, weights):
        x, gates, cell, cell_tanh, hidden = cache
        kernel = weights[self.key("kernel")]
        recurrent = weights[self.key("recurrent")]
        cells = self.spec.units
        batch, n_frames, n_in = x.shape
        if self.return_sequences:
            dhidden = dy
        else:
            dhidden = np.zeros_like(hidden)
            dhidden[:, -1] = dy
        dz_all = np.empty((batch, n_frames, 4 * cells))
        drecurrent = np.zeros_like(recurrent)
        dh_next = np.zeros((batch, cells))
        dc_next = np.zeros((batch, cells))
        for t in reversed(range(n_frames)):
            g = gates[:, t]
            i, f = g[:, :cells], g[:, cells:2 * cells]
            cand, o = g[:, 2 * cells:3 * cells], g[:, 3 * cells:]
            ct = cell_tanh[:, t]
            c_prev = cell[:, t - 1] if t > 0 else np.zeros((batch, cells))
            h_prev = hidden[:, t - 1] if t > 0 else np.zeros((batch, cells))
            dh = dhidden[:, t] + dh_next
            dc = dc_next + dh * o * (1.0 - ct ** 2)
            dz = np.empty((batch, 4 * cells))
            dz[:, :cells] = dc * cand * i * (1.0 - i)
            dz[:, cells:2 * cells] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * cells:3 * cells] = dc * i * (1.0 - cand ** 2)
            dz[:, 3 * cells:] = dh * ct * o * (1.0 - o)
            dc_next = dc * f
            drecurrent += h_prev.T @ dz
            dh_next = dz @ recurrent.T
            dz_all[:, t] = dz
        flat = dz_all.reshape(batch * n_frames, 4 * cells)
        grads = {
            self.key("kernel"): x.reshape(batch * n_frames, n_in).T @ flat,
            self.key("recurrent"): drecurrent,
            self.key("bias"): flat.sum(axis=0)}
        dx = dz_all @ kernel.T
        return dx, grads


class Dense(Layer):
    """Affine map on the last axis followed by the layer's activation.

    Also used for the output layer (softmax or linear).
    """

    def param_shapes(self):
        return [
            (self.key("kernel"), (self.n_in, self.spec.units)),
            (self.key("bias"), (self.spec.units,))]

    def initialize(self, rng):
        return {
            self.key("kernel"): glorot_uniform(
                rng, (self.n_in, self.spec.units),
                self.n_in, self.spec.units),
            self.key("bias"): np.zeros(self.spec.units)}

    def forward(self, x, weights):
        z = x @ weights[self.key("kernel")] + weights[self.key("bias")]
        y = activate(z, self.spec.activation)
        return y, (x, z, y)

    def backward(self, dy, cache, weights):
        x, z, y = cache
        dz = activation_backward(dy, z, y, self.spec.activation)
        flat_x = x.reshape(-1, x.shape[-1])
        flat_dz = dz.reshape(-1, dz.shape[-1])
        grads = {
            self.key("kernel"): flat_x.T @ flat_dz,
            self.key("bias"): flat_dz.sum(axis=0)}
        return dz @ weights[self.key("kernel")].T, grads


def build_layer(spec, name, n_in, return_sequences=True):
    if spec.kind == "conv1d":
        return Conv1D(spec, name, n_in)
    if spec.kind == "maxpool1d":
        return MaxPool1D(spec, name, n_in)
    if spec.kind == "lstm":
        return LSTM(spec, name, n_in, return_sequences)
    return Dense(spec, name, n_in)
