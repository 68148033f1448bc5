"""Feature dataset directories.

A directory holds ``dataset.csv`` (one row per example with its split,
class index or target file and one FMAT1 file per input), the matrices
under ``features/``, regression targets under ``targets/`` and
``metadata.yaml`` (task, class names, input names and provenance).
"""
import pathlib

import numpy as np
import pandas as pd
import yaml

from ..entities.dataset import SPLITS, Dataset, LabeledExample
from ..exceptions import DataError
from .manifest import load_targets, write_targets
from .matrix import load_matrix, save_matrix

TABLE = "dataset.csv"
METADATA = "metadata.yaml"


def plain(value):
    """Convert numpy scalars and containers to YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def save_dataset(dataset, directory):
    """Write ``dataset`` to ``directory``, creating it if needed."""
    directory = pathlib.Path(directory)
    (directory / "features").mkdir(parents=True, exist_ok=True)
    names = dataset.input_names
    regression = dataset.task != "classification"
    if regression:
        (directory / "targets").mkdir(exist_ok=True)
    rows = []
    for split in SPLITS:
        for i, example in enumerate(dataset.split(split)):
            stem = f"{split}_{i:05d}"
            row = dict(id=example.id, split=split)
            if not example.labeled:
                row["target"] = ""
            elif regression:
                target_file = f"targets/{stem}.csv"
                write_targets(example.target, directory / target_file)
                row["target"] = target_file
            else:
                row["target"] = str(int(example.target))
            for name in names:
                matrix_file = f"features/{stem}_{name}.fmat"
                save_matrix(directory / matrix_file,
                            example.select_inputs([name])[name])
                row[f"input:{name}"] = matrix_file
            rows.append(row)
    pd.DataFrame(rows).to_csv(directory / TABLE, index=False)
    header = dict(
        task=dataset.task,
        inputs=list(names),
        class_names=list(dataset.class_names),
        metadata=plain(dataset.metadata))
    (directory / METADATA).write_text(
        yaml.safe_dump(header, sort_keys=True))


def load_dataset(directory):
    """
    Load a dataset directory written by :func:`save_dataset`.

    :raises DataError: if the directory or a referenced file is missing.
    """
    directory = pathlib.Path(directory)
    if not (directory / TABLE).is_file() or not (
            directory / METADATA).is_file():
        raise DataError(f"<{directory}> is not a dataset directory")
    header = yaml.safe_load((directory / METADATA).read_text())
    table = pd.read_csv(directory / TABLE, dtype=str, keep_default_na=False)
    regression = header["task"] != "classification"
    splits = {s: [] for s in SPLITS}
    for line, row in enumerate(table.to_dict("records"), start=2):
        try:
            inputs = {name: load_matrix(directory / row[f"input:{name}"])
                      for name in header["inputs"]}
        except KeyError as err:
            raise DataError(
                f"{TABLE} line {line}: no column for input {err}") from err
        if not row["target"]:
            target = None
        elif regression:
            target = load_targets(directory / row["target"])
        else:
            target = int(row["target"])
        if row["split"] not in splits:
            raise DataError(
                f"{TABLE} line {line}: unknown split <{row['split']}>")
        splits[row["split"]].append(LabeledExample(row["id"], inputs, target))
    return Dataset(
        header["task"], splits, header.get("metadata") or {},
        header.get("class_names") or [])
