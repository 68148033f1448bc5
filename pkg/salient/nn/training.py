import logging
from collections import defaultdict

import numpy as np

from ..exceptions import DataError, NumericError
from .network import Network, target_gradients, stack_examples
from .optim import Adam

logger = logging.getLogger("salient.nn")


def shape_groups(examples, indices, names):
    """Group example indices by input shapes, keeping first-seen order."""
    groups = defaultdict(list)
    for index in indices:
        inputs = examples[index].inputs
        key = tuple(inputs[name].shape for name in names)
        groups[key].append(index)
    return list(groups.values())


class Trainer:
    """Mini-batch Adam training of one network.

    Batches are drawn from a permutation seeded by ``cfg.shuffle_seed``;
    examples of differing lengths inside a batch are processed in
    same-shape groups and their gradients summed before the update, so
    results depend only on the seeds.

    :param NetworkSpec spec: architecture.
    :param LossSpec loss: training loss.
    :param TrainConfig cfg: optimiser settings.
    :param str name: label used in log messages.
    """

    def __init__(self, spec, loss, cfg, name="model"):
        self.spec = spec
        self.loss = loss
        self.cfg = cfg
        self.name = name
        self.network = Network(spec)
        self.history = []

    def batch_gradient(self, params, examples, indices):
        names = self.spec.input_names
        total = 0.0
        grad = params.zeros_like()
        for group in shape_groups(examples, indices, names):
            batch = stack_examples(
                [examples[i].inputs for i in group], names)
            targets = [examples[i].target for i in group]
            outputs, cache = self.network.forward(params, batch)
            value, d_outputs = target_gradients(
                self.spec, self.loss, outputs, targets, "sum")
            bundle = self.network.backward(params, cache, d_outputs)
            total += value
            grad += bundle.param_grads
        n = len(indices)
        return total / n, grad / n

    def fit(self, params, examples):
        """Train a copy of ``params`` on ``examples``.

        :param Parameters params: initial weights (left untouched).
        :param examples: labeled training examples.
        :return Parameters: trained weights.
        :raises NumericError: when a batch loss becomes non-finite.
        """
        examples = list(examples)
        if not examples:
            raise DataError("training set is empty")
        unlabeled = [e.id for e in examples if not e.labeled]
        if unlabeled:
            raise DataError(
                f"training needs labels, {len(unlabeled)} examples "
                f"have none (first: <{unlabeled[0]}>)")
        trained = params.copy()
        optimizer = Adam.from_config(self.cfg)
        rng = np.random.default_rng(self.cfg.shuffle_seed)
        batch_size = self.cfg.batch_size
        for epoch in range(self.cfg.epochs):
            order = rng.permutation(len(examples))
            epoch_losses = []
            for b, start in enumerate(range(0, len(order), batch_size)):
                indices = order[start:start + batch_size]
                try:
                    value, grad = self.batch_gradient(
                        trained, examples, indices)
                except NumericError as err:
                    raise NumericError(
                        f"{self.name}: epoch {epoch}, batch {b}: {err}"
                    ) from err
                if not np.isfinite(value) or not np.all(np.isfinite(grad)):
                    raise NumericError(
                        f"{self.name}: non-finite loss at epoch {epoch}, "
                        f"batch {b}")
                optimizer.step(trained.values, grad)
                epoch_losses.append(value * len(indices))
                logger.debug(
                    f"{self.name} epoch {epoch} batch {b} loss {value:.6f}")
            mean_loss = float(np.sum(epoch_losses) / len(examples))
            self.history.append(dict(epoch=epoch, loss=mean_loss))
            logger.info(f"{self.name} epoch {epoch} loss {mean_loss:.6f}")
        return trained


def train(spec, params, examples, loss, cfg, name="model"):
    """Train ``params`` with Adam and shuffled mini-batches.

    :return Parameters: final weights; ``epochs=0`` returns a copy of the
        initial ones.
    """
    return Trainer(spec, loss, cfg, name).fit(params, examples)
