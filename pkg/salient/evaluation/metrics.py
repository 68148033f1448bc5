import logging

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix

from ..ensemble import agreement_matrix, combine, member_outputs
from ..entities.reports import ConfusionMatrix, EvaluationReport
from ..exceptions import ConfigError, DataError
from ..losses import mse, pearson
from ..nn.network import align_sequences

logger = logging.getLogger("salient.evaluation")


def uar(cm):
    """Unweighted average recall, the mean of per-class recalls.

    :param ConfusionMatrix cm: rows are true classes.
    :raises DataError: if a true class has no examples.
    """
    counts = cm.counts if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    support = counts.sum(axis=1)
    empty = np.flatnonzero(support == 0)
    if empty.size:
        raise DataError(
            f"class {int(empty[0])} has no examples, its recall is undefined")
    return float(np.mean(np.diag(counts) / support))


def confusion(labels, predicted, n_classes):
    return ConfusionMatrix(confusion_matrix(
        labels, predicted, labels=list(range(n_classes))))


def _check_labeled(examples):
    unlabeled = [e.id for e in examples if not e.labeled]
    if unlabeled:
        raise DataError(
            f"evaluation needs labels, {len(unlabeled)} examples have none "
            f"(first: <{unlabeled[0]}>)")


def _summary(values, name):
    values = np.asarray(values, dtype=np.float64)
    return {
        f"member_mean_{name}": float(values.mean()),
        f"member_std_{name}": float(values.std()),
    }


def evaluate_classification(ens, examples):
    outputs = member_outputs(ens, examples)
    labels = np.array([e.target for e in examples], dtype=int)
    n_classes = ens.spec.n_classes
    posteriors = [combine([member[i] for member in outputs])
                  for i in range(len(examples))]
    predicted = np.array([int(np.argmax(p)) for p in posteriors])
    cm = confusion(labels, predicted, n_classes)
    member_uar = [
        uar(confusion(labels, np.argmax(np.array(member), axis=1), n_classes))
        for member in outputs]
    members = pd.DataFrame({
        "member": range(len(outputs)),
        "seed": ens.seeds,
        "uar": member_uar})
    _, agreement = agreement_matrix(np.array(outputs))
    metrics = dict(
        uar=uar(cm),
        accuracy=float(np.mean(predicted == labels)),
        n_examples=len(examples),
        **_summary(member_uar, "uar"),
        member_best_uar=float(np.max(member_uar)),
        agreement=agreement)
    per_file = pd.DataFrame({
        "id": [e.id for e in examples],
        "label": labels,
        "predicted": predicted})
    for k in range(n_classes):
        per_file[f"posterior_{k}"] = [float(p[k]) for p in posteriors]
    return EvaluationReport(
        "classification", metrics, confusion=cm, per_file=per_file,
        members=members,
        predictions={e.id: p for e, p in zip(examples, posteriors)})


def _sequence_scores(predictions, examples):
    rows = []
    for example, prediction in zip(examples, predictions):
        prediction, target = align_sequences(
            prediction, np.asarray(example.target, dtype=np.float64))
        r, degenerate = pearson(prediction, target)
        rows.append(dict(
            id=example.id, pearson=r, mse=mse(prediction, target),
            n_steps=prediction.shape[0], degenerate=degenerate))
    return pd.DataFrame(rows)


def evaluate_regression(ens, examples):
    outputs = member_outputs(ens, examples)
    predictions = [combine([member[i] for member in outputs])
                   for i in range(len(examples))]
    per_file = _sequence_scores(predictions, examples)
    member_scores = [_sequence_scores(member, examples) for member in outputs]
    members = pd.DataFrame({
        "member": range(len(outputs)),
        "seed": ens.seeds,
        "pearson": [s["pearson"].mean() for s in member_scores],
        "mse": [s["mse"].mean() for s in member_scores]})
    if per_file["degenerate"].any():
        logger.warning(
            f"{int(per_file['degenerate'].sum())} files have a constant "
            "prediction or target, their correlation counts as 0")
    metrics = dict(
        pearson=float(per_file["pearson"].mean()),
        mse=float(per_file["mse"].mean()),
        n_examples=len(examples),
        **_summary(members["pearson"], "pearson"),
        member_best_pearson=float(members["pearson"].max()),
        **_summary(members["mse"], "mse"))
    return EvaluationReport(
        "sequence_regression", metrics, per_file=per_file, members=members,
        predictions={e.id: p for e, p in zip(examples, predictions)})


def evaluate(ens, examples, task=None):
    """Score an ensemble on labeled examples.

    Classification reports UAR, accuracy and the confusion matrix;
    regression reports the per-file Pearson r and MSE and their
    unweighted means. Both add per-member scores.

    :param Ensemble ens: trained ensemble, inputs already in its space.
    :param examples: labeled examples of one split.
    :param str task: defaults to the ensemble's task.
    :return EvaluationReport: metrics and tables.
    """
    examples = list(examples)
    if not examples:
        raise DataError("nothing to evaluate")
    _check_labeled(examples)
    task = task or ens.spec.task
    if task != ens.spec.task:
        raise ConfigError(
            f"can't evaluate a {ens.spec.task} ensemble as {task}")
    if task == "classification":
        return evaluate_classification(ens, examples)
    return evaluate_regression(ens, examples)
