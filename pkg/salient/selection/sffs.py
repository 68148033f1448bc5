"""Sequential forward feature selection with linear hinge-loss proxies.

Each candidate subset is scored by training a linear classifier (hinge
loss, L2 penalty, deterministic sub-gradient descent) on per-band
time-averaged energies and measuring its dev UAR.
"""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.linear_model import SGDClassifier
from sklearn.metrics import balanced_accuracy_score
from sklearn.preprocessing import StandardScaler

from ..entities.selection import FeatureMask
from ..exceptions import DataError

logger = logging.getLogger("salient.selection")


@dataclass(frozen=True)
class ProxyConfig:
    alpha: float = 1e-3
    max_iter: int = 50
    random_state: int = 0


def proxy_features(examples, input_name):
    """One time-averaged value per band and example."""
    return np.stack([
        e.inputs[input_name].values.mean(axis=0) for e in examples])


def proxy_model(cfg):
    return SGDClassifier(
        loss="hinge",
        penalty="l2",
        alpha=cfg.alpha,
        max_iter=cfg.max_iter,
        tol=None,
        shuffle=False,
        learning_rate="optimal",
        random_state=cfg.random_state)


def score_subset(columns, X_train, y_train, X_dev, y_dev, cfg):
    model = proxy_model(cfg).fit(X_train[:, columns], y_train)
    return balanced_accuracy_score(y_dev, model.predict(X_dev[:, columns]))


def sffs(dataset, n, proxy_cfg=ProxyConfig(), input_name=None, n_jobs=1):
    """Greedy forward selection of ``n`` bands.

    :param Dataset dataset: labeled classification dataset with train and
        dev splits.
    :param int n: number of bands to select.
    :return: tuple of the :class:`FeatureMask`, the number of proxy models
        trained (``sum_{k<n} (F - k)``) and a per-step history table.
    """
    if dataset.task != "classification":
        raise DataError("SFFS needs a classification dataset")
    if not dataset.labeled:
        raise DataError("SFFS needs labels on every example")
    if not dataset.dev:
        raise DataError("SFFS scores candidates on the dev split, "
                        "which is empty")
    input_name = input_name or dataset.input_names[0]
    y_train = dataset.targets("train")
    y_dev = dataset.targets("dev")
    if np.unique(y_train).shape[0] < 2:
        raise DataError("SFFS needs at least two classes in train")
    scaler = StandardScaler().fit(proxy_features(dataset.train, input_name))
    X_train = scaler.transform(proxy_features(dataset.train, input_name))
    X_dev = scaler.transform(proxy_features(dataset.dev, input_name))
    n_bands = X_train.shape[1]
    if not 1 <= n <= n_bands:
        raise DataError(f"can't select {n} of {n_bands} features")

    selected = []
    trained = 0
    history = []
    for step in range(n):
        candidates = [b for b in range(n_bands) if b not in selected]
        jobs = [
            delayed(score_subset)(
                selected + [b], X_train, y_train, X_dev, y_dev, proxy_cfg)
            for b in candidates]
        if n_jobs == 1:
            scores = [f(*args, **kwargs) for f, args, kwargs in jobs]
        else:
            scores = Parallel(n_jobs=n_jobs)(jobs)
        trained += len(candidates)
        # first maximum wins, candidates are in ascending index order
        best = int(np.argmax(scores))
        selected.append(candidates[best])
        history.append(dict(
            step=step, band=candidates[best], dev_uar=scores[best],
            models_trained=trained))
        logger.info(
            f"SFFS step {step}: band {candidates[best]} "
            f"(dev UAR {scores[best]:.4f})")
    mask = FeatureMask(selected, "sffs", n_bands,
                       details=dict(order=list(selected)))
    return mask, trained, pd.DataFrame(history)


def sffs_model_count(n_bands, n):
    """Number of proxies trained to pick ``n`` of ``n_bands`` bands."""
    return sum(n_bands - k for k in range(n))
