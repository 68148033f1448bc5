import pathlib

import numpy as np
from scipy.io import wavfile

from ..entities.audio import AudioBuffer
from ..exceptions import DataError

PCM16_SCALE = 32768.0


def load_wav(path, expected_rate=None):
    """
    Read a 16-bit mono PCM WAV file.

    :param str path: WAV file.
    :param int expected_rate: required sample rate; no resampling is done.
    :returns AudioBuffer: samples scaled to [-1, 1).
    :raises DataError: on a missing file, another encoding, several
        channels or an unexpected sample rate.
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise DataError(f"audio file <{path}> not found")
    try:
        rate, data = wavfile.read(path)
    except ValueError as err:
        raise DataError(f"can't read <{path}> as WAV: {err}") from err
    if data.dtype != np.int16:
        raise DataError(
            f"<{path}> is {data.dtype} audio, only 16-bit PCM is supported")
    if data.ndim != 1:
        raise DataError(
            f"<{path}> has {data.shape[1]} channels, only mono is supported")
    if expected_rate is not None and rate != expected_rate:
        raise DataError(
            f"<{path}> is sampled at {rate} Hz, expected {expected_rate} Hz")
    return AudioBuffer(data.astype(np.float64) / PCM16_SCALE, rate)


def write_wav(audio, path):
    """Write ``audio`` as 16-bit mono PCM, clipping to the PCM range."""
    scaled = np.clip(np.round(audio.samples * PCM16_SCALE), -32768, 32767)
    wavfile.write(pathlib.Path(path), int(audio.sample_rate),
                  scaled.astype(np.int16))
