import logging

import numpy as np
from scipy import signal

from ..entities.audio import PreEmphasisConfig
from ..exceptions import ConfigError, DataError

logger = logging.getLogger("salient.dsp")

MAX_BUTTERWORTH_ORDER = 12


def preemphasize(audio, cfg=PreEmphasisConfig()):
    """First-order high-pass ``y[n] = x[n] - c * x[n-1]`` with ``y[0] = x[0]``.

    :param AudioBuffer audio: input waveform.
    :param PreEmphasisConfig cfg: filter coefficient.
    :return AudioBuffer: filtered waveform, same length and rate.
    """
    samples = np.asarray(audio.samples, dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(samples))
    if bad.size:
        raise DataError(f"non-finite audio sample at index {bad[0]}")
    filtered = signal.lfilter([1.0, -cfg.coefficient], [1.0], samples)
    return audio.replace(filtered)


def butterworth_sos(order, cutoff, sample_rate):
    """Digital Butterworth low-pass as second-order sections.

    The analog prototype is mapped with the bilinear transform after
    prewarping ``cutoff``, so the -3 dB point lands exactly on it.

    :raises ConfigError: if the cutoff is not below Nyquist or the order
        is outside [1, 12].
    """
    if not 1 <= order <= MAX_BUTTERWORTH_ORDER:
        raise ConfigError(
            f"Butterworth order must be in [1, {MAX_BUTTERWORTH_ORDER}], "
            f"got {order}")
    if not 0 < cutoff < sample_rate / 2:
        raise ConfigError(
            f"cutoff {cutoff} Hz must lie strictly between 0 and the "
            f"Nyquist frequency {sample_rate / 2} Hz")
    return signal.butter(
        order, cutoff, btype="low", fs=sample_rate, output="sos")


def butterworth_lowpass(audio, order=5, cutoff=400.0):
    """Low-pass filter the waveform with a cascaded-SOS Butterworth filter.

    :param AudioBuffer audio: input waveform.
    :param int order: filter order, 5 by default.
    :param float cutoff: -3 dB frequency in Hz, 400 by default.
    :return AudioBuffer: filtered waveform, same length and rate.
    """
    sos = butterworth_sos(order, cutoff, audio.sample_rate)
    logger.debug(
        f"butterworth order={order} cutoff={cutoff} Hz "
        f"({sos.shape[0]} sections)")
    return audio.replace(signal.sosfilt(sos, audio.samples))
