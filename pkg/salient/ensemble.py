"""Training and combination of independently seeded networks.

Members see the full training set; diversity comes from the
initialisation seed and the shuffling seed only. Member outputs are
summed with an exactly rounded sum, so ensemble outputs are bit-stable
under any member order or training schedule.
"""
import itertools
import logging
import math

import numpy as np
from joblib import Parallel, delayed

from .entities.ensemble import Ensemble
from .entities.network import TrainConfig
from .exceptions import ConfigError, DataError, SalientError
from .nn.network import Network, stack_examples
from .nn.training import Trainer, shape_groups

logger = logging.getLogger("salient.ensemble")


def _train_member(spec, examples, loss, cfg, seed, index):
    member_cfg = TrainConfig(
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        epochs=cfg.epochs,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        epsilon=cfg.epsilon,
        shuffle_seed=seed)
    trainer = Trainer(spec, loss, member_cfg, name=f"member {index}")
    try:
        params = trainer.fit(Network(spec).init(seed), examples)
    except SalientError as err:
        raise type(err)(f"ensemble member {index} failed: {err}") from err
    return params, trainer.history


def train_ensemble(
        spec,
        examples,
        loss,
        cfg,
        n=10,
        base_seed=0,
        n_jobs=1,
        mask=None):
    """Train ``n`` members, member ``i`` with seed ``base_seed + i``.

    :param examples: labeled training examples (train split only).
    :param int n_jobs: members trained concurrently; results don't depend
        on it.
    :return Ensemble: trained ensemble with per-member loss history.
    """
    if n < 1:
        raise ConfigError("ensemble size must be at least 1")
    examples = list(examples)
    seeds = [base_seed + i for i in range(n)]
    logger.info(
        f"training {n} members with seeds {seeds[0]}..{seeds[-1]} "
        f"on {len(examples)} examples")
    jobs = (
        delayed(_train_member)(spec, examples, loss, cfg, seed, i)
        for i, seed in enumerate(seeds))
    if n_jobs == 1:
        results = [function(*args, **kwargs) for function, args, kwargs
                   in jobs]
    else:
        results = Parallel(n_jobs=n_jobs)(jobs)
    members = [params for params, _ in results]
    history = {i: h for i, (_, h) in enumerate(results)}
    return Ensemble(spec, members, seeds, loss, mask=mask, history=history)


def member_outputs(ens, examples):
    """Raw outputs of every member on every example.

    :return: list (members) of lists (examples) of 1-D arrays, posteriors
        or sequences.
    """
    examples = list(examples)
    if not examples:
        raise DataError("no examples to predict")
    names = ens.spec.input_names
    network = Network(ens.spec)
    groups = shape_groups(examples, range(len(examples)), names)
    outputs = []
    for params in ens.members:
        per_example = [None] * len(examples)
        for group in groups:
            batch = stack_examples(
                [examples[i].select_inputs(names) for i in group], names)
            out = network.predict(params, batch)
            for i, row in zip(group, out):
                per_example[i] = row
        outputs.append(per_example)
    return outputs


def combine(member_values):
    """Arithmetic mean over members.

    The sum is exactly rounded (:func:`math.fsum`), so it doesn't depend on
    the order of the members.
    """
    shapes = {np.shape(v) for v in member_values}
    if len(shapes) != 1:
        raise RuntimeError(
            f"ensemble members returned differing shapes {sorted(shapes)}")
    shape = shapes.pop()
    stacked = np.array(member_values, dtype=np.float64).reshape(
        len(member_values), -1)
    total = np.array([math.fsum(column) for column in stacked.T])
    return total.reshape(shape) / len(member_values)


def _single(ens, inputs):
    network = Network(ens.spec)
    batch = {
        name: (value.values if hasattr(value, "values") else
               np.asarray(value, dtype=np.float64))[None]
        for name, value in inputs.items()}
    return [network.predict(params, batch)[0] for params in ens.members]


def predict_regression(ens, inputs):
    """Ensemble sequence ``(1/N) * sum_i f_i(x)`` for one example."""
    if ens.spec.task != "sequence_regression":
        raise ConfigError("predict_regression needs a regression ensemble")
    return combine(_single(ens, inputs))


def predict_classification(ens, inputs):
    """Soft voting: averaged member posteriors and their argmax.

    :return: tuple of the posterior vector and the class index; ties go to
        the lower class index.
    """
    if ens.spec.task != "classification":
        raise ConfigError(
            "predict_classification needs a classification ensemble")
    posterior = combine(_single(ens, inputs))
    return posterior, int(np.argmax(posterior))


def predict_all(ens, examples):
    """Combined ensemble outputs for a list of examples."""
    outputs = member_outputs(ens, examples)
    return [combine([member[i] for member in outputs])
            for i in range(len(outputs[0]))]


def agreement_matrix(member_posteriors):
    """Pairwise agreement of members' argmax decisions.

    :param member_posteriors: array (members, examples, classes).
    :return: tuple of an N × N percentage matrix (diagonal 100) and the
        mean over distinct pairs (NaN for a single member).
    """
    labels = np.argmax(np.asarray(member_posteriors), axis=-1)
    n = labels.shape[0]
    matrix = np.full((n, n), 100.0)
    pairs = []
    for i, j in itertools.combinations(range(n), 2):
        value = 100.0 * np.mean(labels[i] == labels[j])
        matrix[i, j] = matrix[j, i] = value
        pairs.append(value)
    mean = float(np.mean(pairs)) if pairs else float("nan")
    return matrix, mean


def inter_model_agreement(ens, examples):
    """Pairwise percentage of examples on which two members agree."""
    if ens.spec.task != "classification":
        raise ConfigError("agreement is defined for classifiers only")
    outputs = member_outputs(ens, examples)
    return agreement_matrix(np.array(outputs))
