import logging
import pathlib

import numpy as np
import pandas as pd

from ..dsp.spectral import FeatureExtractor
from ..entities.dataset import SPLITS, Dataset, LabeledExample
from ..exceptions import ConfigError, DataError
from .audio import load_wav

logger = logging.getLogger("salient.loaders")

MANIFEST_COLUMNS = ("id", "wav_path", "split", "label_or_target_path")


def load_targets(path):
    """
    Load a target sequence, one real per line without header.

    :param str path: target CSV file.
    :returns numpy.ndarray: float64 sequence.
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise DataError(f"target file <{path}> not found")
    try:
        table = pd.read_csv(path, header=None, dtype=np.float64)
    except (ValueError, pd.errors.EmptyDataError) as err:
        raise DataError(f"can't read targets from <{path}>: {err}") from err
    if table.shape[1] != 1:
        raise DataError(
            f"<{path}> has {table.shape[1]} columns, expected one value "
            "per line")
    values = table.iloc[:, 0].to_numpy()
    if not np.all(np.isfinite(values)):
        raise DataError(f"<{path}> contains non-finite targets")
    return values


def write_targets(values, path):
    pd.Series(np.asarray(values, dtype=np.float64)).to_csv(
        path, header=False, index=False, float_format="%.17g")


def read_manifest(manifest_path):
    """
    Parse and validate a manifest CSV.

    :returns pandas.DataFrame: rows with a 1-based ``line`` column giving
        their position in the file (the header is line 1).
    """
    manifest_path = pathlib.Path(manifest_path)
    if not manifest_path.is_file():
        raise DataError(f"manifest <{manifest_path}> not found")
    table = pd.read_csv(manifest_path, dtype=str, keep_default_na=False)
    missing = [c for c in MANIFEST_COLUMNS if c not in table.columns]
    if missing:
        raise DataError(
            f"manifest <{manifest_path}> lacks columns {missing}")
    table = table[list(MANIFEST_COLUMNS)].copy()
    table["line"] = np.arange(len(table)) + 2
    first_line = {}
    for row in table.itertuples():
        if not row.id:
            raise DataError(f"manifest line {row.line}: empty id")
        if row.id in first_line:
            raise DataError(
                f"manifest lines {first_line[row.id]} and {row.line} "
                f"share the id <{row.id}>")
        first_line[row.id] = row.line
        if row.split not in SPLITS:
            raise DataError(
                f"manifest line {row.line}: unknown split <{row.split}>, "
                f"expected one of {list(SPLITS)}")
    return table


def load_audio_dataset(
        manifest_path,
        task="classification",
        extractors=None,
        expected_rate=16000,
        expected_steps=None,
        keep_audio=False):
    """
    Build a dataset from WAV files listed in a manifest.

    Relative paths are resolved against the manifest's directory. Labels of
    a classification manifest are strings mapped to indices in first-seen
    order; a regression manifest points to target CSV files.

    :param dict extractors: input name → :class:`FeatureExtractor`
        (default one log-mel input named ``spect``).
    :param int expected_steps: target length expected by the network;
        mismatches are logged and recorded in the metadata.
    :param bool keep_audio: keep waveforms on the examples (benchmarking).
    :returns Dataset: loaded dataset.
    """
    if task not in ("classification", "sequence_regression"):
        raise ConfigError(f"unknown task <{task}>")
    manifest_path = pathlib.Path(manifest_path)
    extractors = extractors or {"spect": FeatureExtractor()}
    table = read_manifest(manifest_path)
    root = manifest_path.parent
    class_names = []
    mismatched = []
    splits = {s: [] for s in SPLITS}
    for row in table.itertuples():
        wav_path = root / row.wav_path
        if not wav_path.is_file():
            raise DataError(
                f"manifest line {row.line}: audio <{wav_path}> not found")
        try:
            audio = load_wav(wav_path, expected_rate)
            inputs = {name: extract(audio)
                      for name, extract in extractors.items()}
        except DataError as err:
            raise DataError(f"manifest line {row.line}: {err}") from err
        if task == "classification":
            if not row.label_or_target_path:
                target = None
            else:
                if row.label_or_target_path not in class_names:
                    class_names.append(row.label_or_target_path)
                target = class_names.index(row.label_or_target_path)
        elif row.label_or_target_path:
            target_path = root / row.label_or_target_path
            if not target_path.is_file():
                raise DataError(
                    f"manifest line {row.line}: targets <{target_path}> "
                    "not found")
            target = load_targets(target_path)
            if expected_steps is not None and len(target) != expected_steps:
                logger.warning(
                    f"<{row.id}> has {len(target)} targets, the network "
                    f"produces {expected_steps}")
                mismatched.append(dict(
                    id=row.id, targets=len(target), expected=expected_steps))
        else:
            target = None
        splits[row.split].append(LabeledExample(
            row.id, inputs, target, audio if keep_audio else None))
    logger.info(
        f"loaded {len(table)} files from <{manifest_path}>: " + ", ".join(
            f"{len(v)} {k}" for k, v in splits.items()))
    metadata = dict(source=str(manifest_path))
    if mismatched:
        metadata["target_length_mismatch"] = mismatched
    return Dataset(task, splits, metadata, class_names)
