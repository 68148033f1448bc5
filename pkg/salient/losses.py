"""Training losses and their gradients w.r.t. the network output.

Regression losses are computed per sequence (per utterance); batch losses
are the mean of the per-sequence values.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError

logger = logging.getLogger("salient.losses")

LOSS_KINDS = ("cross_entropy", "mse", "corr", "corr_plus_mse")
PROBABILITY_CLAMP = 1e-12
POSTERIOR_TOLERANCE = 1e-6
VARIANCE_FLOOR = 1e-12

Correlation = namedtuple("Correlation", ["r", "degenerate"])


@dataclass(frozen=True)
class LossSpec:
    """Which loss to optimise.

    Identifiers used in configs and model headers are ``xent``, ``mse``,
    ``corr`` and ``corr+mse:<lambda>``.
    """

    kind: str = "cross_entropy"
    lambda_mse: float = 1.0

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigError(f"unknown loss kind <{self.kind}>")
        if not np.isfinite(self.lambda_mse) or self.lambda_mse < 0:
            raise ConfigError("lambda_mse must be finite and non-negative")

    @property
    def identifier(self):
        if self.kind == "cross_entropy":
            return "xent"
        if self.kind == "corr_plus_mse":
            return f"corr+mse:{self.lambda_mse!r}"
        return self.kind

    @property
    def task(self):
        if self.kind == "cross_entropy":
            return "classification"
        return "sequence_regression"

    @classmethod
    def parse(cls, identifier):
        identifier = str(identifier).strip()
        if identifier == "xent":
            return cls("cross_entropy")
        if identifier in ("mse", "corr"):
            return cls(identifier)
        if identifier == "corr+mse":
            return cls("corr_plus_mse")
        if identifier.startswith("corr+mse:"):
            try:
                weight = float(identifier.split(":", 1)[1])
            except ValueError as err:
                raise ConfigError(
                    f"bad MSE weight in loss <{identifier}>") from err
            return cls("corr_plus_mse", weight)
        raise ConfigError(f"unknown loss identifier <{identifier}>")


def _sequences(pred, target):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if pred.shape != target.shape:
        raise DataError(
            f"prediction length {pred.shape[0]} doesn't match target "
            f"length {target.shape[0]}")
    return pred, target


def _posterior(posterior, label):
    posterior = np.asarray(posterior, dtype=np.float64).reshape(-1)
    if not 0 <= int(label) < posterior.shape[0]:
        raise DataError(
            f"label {label} out of range for {posterior.shape[0]} classes")
    total = posterior.sum()
    if not abs(total - 1.0) <= POSTERIOR_TOLERANCE:
        raise DataError(f"posterior sums to {total}, not 1")
    return posterior


def cross_entropy(posterior, label):
    """-log(posterior[label]) with the probability clamped at 1e-12."""
    posterior = _posterior(posterior, label)
    return float(-np.log(max(posterior[int(label)], PROBABILITY_CLAMP)))


def cross_entropy_grad(posterior, label):
    """Gradient of :func:`cross_entropy` w.r.t. the posterior vector."""
    posterior = _posterior(posterior, label)
    grad = np.zeros_like(posterior)
    p = posterior[int(label)]
    if p > PROBABILITY_CLAMP:
        grad[int(label)] = -1.0 / p
    return grad


def mse(pred, target):
    pred, target = _sequences(pred, target)
    if pred.shape[0] < 1:
        raise DataError("mse needs at least one value")
    return float(np.mean((pred - target) ** 2))


def mse_grad(pred, target):
    pred, target = _sequences(pred, target)
    return 2.0 * (pred - target) / pred.shape[0]


def pearson(pred, target):
    """Sample Pearson correlation.

    :return Correlation: ``(r, degenerate)``; ``r`` is 0 and ``degenerate``
        True when either sequence has variance below 1e-12.
    :raises DataError: for sequences shorter than 2.
    """
    pred, target = _sequences(pred, target)
    if pred.shape[0] < 2:
        raise DataError("pearson correlation needs at least 2 values")
    a = pred - pred.mean()
    b = target - target.mean()
    saa = float(a @ a)
    sbb = float(b @ b)
    n = pred.shape[0]
    if saa / n < VARIANCE_FLOOR or sbb / n < VARIANCE_FLOOR:
        return Correlation(0.0, True)
    r = float(a @ b) / np.sqrt(saa * sbb)
    return Correlation(float(np.clip(r, -1.0, 1.0)), False)


def pearson_grad(pred, target):
    """Gradient of Pearson r w.r.t. ``pred`` (zero when degenerate)."""
    pred, target = _sequences(pred, target)
    r, degenerate = pearson(pred, target)
    if degenerate:
        return np.zeros_like(pred)
    a = pred - pred.mean()
    b = target - target.mean()
    saa = a @ a
    sbb = b @ b
    # a and b are centered, so the centering Jacobian drops out
    return b / np.sqrt(saa * sbb) - r * a / saa


def corr_loss(pred, target):
    return 1.0 - pearson(pred, target).r


def combined_loss(pred, target, lambda_mse=1.0):
    return corr_loss(pred, target) + lambda_mse * mse(pred, target)


def loss_value(loss, output, target):
    """Loss of a single example under ``loss``."""
    if loss.kind == "cross_entropy":
        return cross_entropy(output, target)
    if loss.kind == "mse":
        return mse(output, target)
    if loss.kind == "corr":
        return corr_loss(output, target)
    return combined_loss(output, target, loss.lambda_mse)


def loss_grad(loss, output, target):
    """Gradient of :func:`loss_value` w.r.t. ``output``."""
    if loss.kind == "cross_entropy":
        return cross_entropy_grad(output, target)
    if loss.kind == "mse":
        return mse_grad(output, target)
    if loss.kind == "corr":
        return -pearson_grad(output, target)
    return (-pearson_grad(output, target)
            + loss.lambda_mse * mse_grad(output, target))


def batch_loss(loss, outputs, targets):
    """Per-example losses and output gradients of a batch.

    :param outputs: (B, K) posteriors or (B, T) sequences.
    :param targets: B labels or B sequences.
    :return: tuple of a (B,) loss array and a gradient array shaped like
        ``outputs``.
    """
    values = np.empty(len(outputs))
    grads = np.empty_like(outputs)
    degenerate = 0
    for b, (output, target) in enumerate(zip(outputs, targets)):
        values[b] = loss_value(loss, output, target)
        grads[b] = loss_grad(loss, output, target)
        if loss.kind in ("corr", "corr_plus_mse"):
            degenerate += pearson(output, target).degenerate
    if degenerate:
        logger.warning(
            f"{degenerate} of {len(outputs)} sequences had degenerate "
            "variance, their correlation was set to 0")
    return values, grads
