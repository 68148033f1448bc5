"""FMAT1 binary container for feature matrices.

Layout, all little-endian: the 5 ASCII bytes ``FMAT1``; T and F as int64;
the frame rate as float64; F band labels, each an int64 byte length
followed by UTF-8 bytes; T × F float64 cells in row-major order.
"""
import pathlib

import numpy as np

from ..entities.audio import FeatureMatrix
from ..exceptions import DataError

MAGIC = b"FMAT1"
INT = np.dtype("<i8")
FLOAT = np.dtype("<f8")


def encode_matrix(features):
    if not isinstance(features, FeatureMatrix):
        raise DataError("only feature matrices can be written as FMAT1")
    n_frames, n_bands = features.shape
    if n_frames < 1:
        raise DataError("can't write a matrix without frames")
    chunks = [
        MAGIC,
        np.array([n_frames, n_bands], dtype=INT).tobytes(),
        np.array([features.frame_rate], dtype=FLOAT).tobytes()]
    for label in features.band_labels:
        encoded = str(label).encode("utf-8")
        chunks.append(np.array([len(encoded)], dtype=INT).tobytes())
        chunks.append(encoded)
    chunks.append(np.ascontiguousarray(features.values, dtype=FLOAT).tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data, source):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, n_bytes, what):
        if n_bytes < 0 or self.offset + n_bytes > len(self.data):
            raise DataError(
                f"corrupt FMAT1 file <{self.source}>: truncated while "
                f"reading {what}")
        chunk = self.data[self.offset:self.offset + n_bytes]
        self.offset += n_bytes
        return chunk

    def numbers(self, dtype, count, what):
        return np.frombuffer(
            self.take(dtype.itemsize * count, what), dtype=dtype, count=count)


def decode_matrix(data, source="<bytes>"):
    reader = _Reader(data, source)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise DataError(f"corrupt FMAT1 file <{source}>: bad magic")
    n_frames, n_bands = (int(v) for v in reader.numbers(INT, 2, "dims"))
    if n_frames < 1 or n_bands < 1:
        raise DataError(
            f"corrupt FMAT1 file <{source}>: dims {n_frames} × {n_bands}")
    frame_rate = float(reader.numbers(FLOAT, 1, "frame rate")[0])
    labels = []
    for band in range(n_bands):
        length = int(reader.numbers(INT, 1, f"label {band}")[0])
        try:
            labels.append(
                reader.take(length, f"label {band}").decode("utf-8"))
        except UnicodeDecodeError as err:
            raise DataError(
                f"corrupt FMAT1 file <{source}>: label {band} isn't UTF-8"
            ) from err
    cells = reader.numbers(FLOAT, n_frames * n_bands, "cells")
    if reader.offset != len(data):
        raise DataError(
            f"corrupt FMAT1 file <{source}>: "
            f"{len(data) - reader.offset} trailing bytes")
    values = cells.reshape(n_frames, n_bands).astype(np.float64)
    return FeatureMatrix(values, labels, frame_rate)


def save_matrix(path, features):
    """Write ``features`` to ``path`` in the FMAT1 format."""
    pathlib.Path(path).write_bytes(encode_matrix(features))


def load_matrix(path):
    """Read an FMAT1 file.

    :raises DataError: if the file is missing, truncated or malformed.
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise DataError(f"matrix file <{path}> not found")
    return decode_matrix(path.read_bytes(), source=path)
