"""Gradient-saliency importance scores and ensemble feature voting.

The importance of band ``i`` is the sum, over the examples and over their
time frames, of the absolute gradient of either one output scalar
(``output`` source, no labels needed) or the example's loss (``loss``
source, labels required) w.r.t. the input cells of that band.
"""
import logging
import math

import numpy as np
from joblib import Parallel, delayed

from ..entities.selection import FeatureMask, ImportanceVector, VoteTally
from ..exceptions import ConfigError, DataError
from ..nn.network import Network, stack_examples, target_gradients, unit_seeds
from ..nn.training import shape_groups

logger = logging.getLogger("salient.selection")

ORIGIN_OF_SOURCE = {"output": "output_grad", "loss": "loss_grad"}


def unit_rule(spec, examples):
    """Name of the scalar differentiated in output mode."""
    if spec.task != "classification":
        return "sum"
    labeled = [e.labeled for e in examples]
    if all(labeled):
        return "true_class"
    if not any(labeled):
        return "argmax"
    return "true_class_or_argmax"


def saliency_maps(spec, params, examples, source="output", loss=None,
                  branch=None):
    """Signed input gradients of every example for one branch.

    :return: list of (T, F) arrays aligned with ``examples``.
    """
    examples = list(examples)
    if not examples:
        raise DataError("importance needs at least one example")
    branch = branch or spec.input_names[0]
    spec.branch(branch)
    if source not in ORIGIN_OF_SOURCE:
        raise ConfigError(f"unknown importance source <{source}>")
    if source == "loss":
        if loss is None:
            raise ConfigError("loss-based importance needs the training loss")
        unlabeled = [e.id for e in examples if not e.labeled]
        if unlabeled:
            raise DataError(
                "loss-based importance requires labels; "
                f"{len(unlabeled)} examples are unlabeled "
                f"(first: <{unlabeled[0]}>)")
    names = spec.input_names
    network = Network(spec)
    maps = [None] * len(examples)
    for group in shape_groups(examples, range(len(examples)), names):
        batch = stack_examples(
            [examples[i].select_inputs(names) for i in group], names)
        outputs, cache = network.forward(params, batch)
        if source == "loss":
            targets = [examples[i].target for i in group]
            _, seeds = target_gradients(spec, loss, outputs, targets, "sum")
        elif spec.task == "classification":
            units = [
                int(examples[i].target) if examples[i].labeled
                else int(np.argmax(out))
                for i, out in zip(group, outputs)]
            seeds = unit_seeds(spec, outputs, units)
        else:
            seeds = unit_seeds(spec, outputs, "sum")
        bundle = network.backward(params, cache, seeds)
        for i, grad in zip(group, bundle.input_grads[branch]):
            maps[i] = grad
    return maps


def importance(spec, params, examples, source="output", loss=None,
               branch=None, model_id=None):
    """Accumulated |gradient| per band of ``branch``.

    :param examples: examples to attribute over (the training split).
    :param str source: ``output`` or ``loss``.
    :param LossSpec loss: loss of the model, required for ``loss``.
    :return ImportanceVector: per-band scores.
    """
    maps = saliency_maps(spec, params, examples, source, loss, branch)
    per_example = np.array([np.abs(grad).sum(axis=0) for grad in maps])
    # exactly rounded over examples: duplicating the set doubles the scores
    scores = np.array([math.fsum(column) for column in per_example.T])
    rule = unit_rule(spec, examples) if source == "output" else "loss"
    return ImportanceVector(scores, source, model_id=model_id, unit_rule=rule)


def top_n(iv, n):
    """Indices of the ``n`` largest scores, ranked by (score desc, index asc).

    :raises DataError: if ``n`` is not in [1, F].
    """
    scores = iv.scores if isinstance(iv, ImportanceVector) else np.asarray(iv)
    if not 1 <= n <= scores.shape[0]:
        raise DataError(
            f"can't select {n} of {scores.shape[0]} features")
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    return [int(i) for i in order[:n]]


def bottom_n(iv, n):
    """Indices of the ``n`` smallest scores (score asc, index asc)."""
    scores = iv.scores if isinstance(iv, ImportanceVector) else np.asarray(iv)
    if not 1 <= n <= scores.shape[0]:
        raise DataError(
            f"can't select {n} of {scores.shape[0]} features")
    order = np.lexsort((np.arange(scores.shape[0]), scores))
    return [int(i) for i in order[:n]]


def vote(importances, n, reverse=False):
    """Majority vote over per-member rankings.

    Each member votes for its top ``n`` bands (its bottom ``n`` when
    ``reverse``). Bands are ranked by votes, then by the summed scores
    (descending, ascending when ``reverse``), then by index.

    :return: tuple of the ranked winning indices and the :class:`VoteTally`.
    """
    importances = list(importances)
    if not importances:
        raise DataError("voting needs at least one importance vector")
    n_bands = len(importances[0])
    votes = np.zeros(n_bands, dtype=int)
    for iv in importances:
        chosen = bottom_n(iv, n) if reverse else top_n(iv, n)
        votes[chosen] += 1
    # exact summation keeps the tally independent of member order
    summed = np.array([
        math.fsum(float(iv.scores[b]) for iv in importances)
        for b in range(n_bands)])
    secondary = summed if reverse else -summed
    order = np.lexsort((np.arange(n_bands), secondary, -votes))
    tally = VoteTally(votes, len(importances), summed)
    return [int(i) for i in order[:n]], tally


def ensemble_importances(ens, examples, source="output", branch=None,
                         n_jobs=1):
    """One :class:`ImportanceVector` per member, in member order."""
    examples = list(examples)
    jobs = [
        delayed(importance)(
            ens.spec, params, examples, source, ens.loss, branch, i)
        for i, params in enumerate(ens.members)]
    if n_jobs == 1:
        return [function(*args, **kwargs) for function, args, kwargs in jobs]
    return Parallel(n_jobs=n_jobs)(jobs)


def majority_vote_select(ens, examples, source="output", n=10, branch=None,
                         n_jobs=1, importances=None):
    """Select ``n`` bands by majority vote of the ensemble members.

    :param importances: precomputed member importance vectors, skipping
        the gradient pass.
    :return: tuple of the :class:`FeatureMask` and the :class:`VoteTally`.
    """
    if importances is None:
        importances = ensemble_importances(
            ens, examples, source, branch, n_jobs)
    indices, tally = vote(importances, n)
    supported = int(np.sum(tally.votes[indices] * 2 >= tally.n_models))
    logger.info(
        f"selected bands {sorted(indices)}; {supported} of {n} "
        f"have majority support")
    mask = FeatureMask(
        indices, ORIGIN_OF_SOURCE[source], len(importances[0]),
        details=dict(source=source, unit_rule=importances[0].unit_rule))
    return mask, tally


def baseline_mask(kind, n, n_bands, seed=None, ens=None, examples=None,
                  source="output", branch=None, importances=None):
    """Reference masks: ``lowest``, ``random`` and ``least_important``.

    ``least_important`` votes over reversed member rankings and needs
    either an ensemble with examples or precomputed importances.
    """
    if not 1 <= n <= n_bands:
        raise DataError(f"can't select {n} of {n_bands} features")
    if kind == "lowest":
        return FeatureMask(range(n), "lowest", n_bands)
    if kind == "random":
        rng = np.random.default_rng(seed)
        chosen = rng.choice(n_bands, size=n, replace=False)
        return FeatureMask(chosen, "random", n_bands, details=dict(seed=seed))
    if kind == "least_important":
        if importances is None:
            if ens is None or examples is None:
                raise ConfigError(
                    "least_important needs an ensemble and a dataset")
            importances = ensemble_importances(ens, examples, source, branch)
        indices, _ = vote(importances, n, reverse=True)
        return FeatureMask(
            indices, "least_important", n_bands,
            details=dict(source=source))
    raise ConfigError(f"unknown baseline mask <{kind}>")
