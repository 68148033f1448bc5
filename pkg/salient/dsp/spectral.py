import logging
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import librosa
import numpy as np

from ..entities.audio import FeatureMatrix, PreEmphasisConfig, SpectrogramConfig
from ..exceptions import ConfigError, DataError
from .filters import butterworth_lowpass, preemphasize

logger = logging.getLogger("salient.dsp")

RATIO_EPSILON = 1e-10
FEATURE_KINDS = ("logmel", "preemph", "ratio", "logmel+ratio", "raw")


@lru_cache(maxsize=32)
def mel_filterbank(sample_rate, n_fft, n_mel, fmin, fmax):
    """Triangular HTK mel filterbank of shape (n_mel, 1 + n_fft // 2)."""
    with warnings.catch_warnings():
        # narrow low filters may fall between FFT bins
        warnings.simplefilter("ignore", UserWarning)
        basis = librosa.filters.mel(
            sr=sample_rate, n_fft=n_fft, n_mels=n_mel,
            fmin=fmin, fmax=fmax, htk=True, norm=None, dtype=np.float64)
    basis.setflags(write=False)
    return basis


def mel_center_frequencies(cfg):
    """Center frequency in Hz of every mel filter."""
    edges = librosa.mel_frequencies(
        n_mels=cfg.n_mel + 2, fmin=cfg.fmin, fmax=cfg.fmax, htk=True)
    return edges[1:-1]


def power_spectrogram(audio, cfg):
    """Squared-magnitude STFT with a Hann window, shape (bins, frames)."""
    if len(audio) < cfg.n_fft:
        raise DataError(
            f"audio of {len(audio)} samples is shorter than one "
            f"{cfg.n_fft}-sample frame")
    stft = librosa.stft(
        audio.samples, n_fft=cfg.n_fft, hop_length=cfg.hop,
        window="hann", center=False)
    return np.abs(stft) ** 2


def log_mel_spectrogram(audio, cfg=SpectrogramConfig(), bands=None):
    """Natural-log mel spectrogram.

    :param AudioBuffer audio: input waveform, at least ``n_fft`` samples.
    :param SpectrogramConfig cfg: STFT and filterbank settings.
    :param bands: optional ascending band indices; when given only those
        filters are evaluated, which equals ``band_select`` of the full
        output.
    :return FeatureMatrix: T × n_mel (or T × len(bands)) matrix labelled
        with the mel center frequencies.
    """
    cfg.check_rate(audio.sample_rate)
    power = power_spectrogram(audio, cfg)
    basis = mel_filterbank(
        audio.sample_rate, cfg.n_fft, cfg.n_mel, cfg.fmin, cfg.fmax)
    centers = mel_center_frequencies(cfg)
    if bands is not None:
        bands = list(bands)
        basis = basis[bands]
        centers = centers[bands]
    mel = basis @ power
    values = np.log(mel + cfg.log_floor).T
    return FeatureMatrix(
        values,
        [float(c) for c in centers],
        audio.sample_rate / cfg.hop)


def frequency_ratio(audio, cfg=SpectrogramConfig(), boundary=400.0):
    """Per-frame ratio of spectral energy below and above ``boundary``.

    :return FeatureMatrix: T × 1 matrix labelled ``ratio``.
    """
    if not 0 < boundary < audio.sample_rate / 2:
        raise ConfigError(
            f"ratio boundary {boundary} Hz must lie strictly between 0 and "
            f"{audio.sample_rate / 2} Hz")
    power = power_spectrogram(audio, cfg)
    freqs = librosa.fft_frequencies(sr=audio.sample_rate, n_fft=cfg.n_fft)
    low = power[freqs < boundary].sum(axis=0)
    high = power[freqs >= boundary].sum(axis=0)
    ratio = (low + RATIO_EPSILON) / (high + RATIO_EPSILON)
    return FeatureMatrix(
        ratio.reshape(-1, 1), ["ratio"], audio.sample_rate / cfg.hop)


def band_select(features, mask):
    """Restrict a matrix to the columns of ``mask``, in ascending order.

    :param FeatureMatrix features: input matrix.
    :param mask: :class:`FeatureMask` or iterable of band indices.
    :raises DataError: on an empty mask or an out-of-range index.
    """
    indices = sorted(int(i) for i in mask)
    if not indices:
        raise DataError("band selection can't be empty")
    for index in indices:
        if not 0 <= index < features.n_bands:
            raise DataError(
                f"band index {index} out of range for "
                f"{features.n_bands} bands")
    return FeatureMatrix(
        features.values[:, indices],
        [features.band_labels[i] for i in indices],
        features.frame_rate)


def stack_time(features):
    """Column-wise concatenation of frame-aligned matrices."""
    features = list(features)
    if not features:
        raise DataError("nothing to stack")
    first = features[0]
    for other in features[1:]:
        if other.n_frames != first.n_frames:
            raise DataError(
                f"frame count mismatch: {first.n_frames} vs "
                f"{other.n_frames}")
        if other.frame_rate != first.frame_rate:
            raise DataError(
                f"frame rate mismatch: {first.frame_rate} vs "
                f"{other.frame_rate}")
    return FeatureMatrix(
        np.concatenate([f.values for f in features], axis=1),
        [label for f in features for label in f.band_labels],
        first.frame_rate)


@dataclass(frozen=True)
class FeatureExtractor:
    """Turns a waveform into the matrix a network branch consumes.

    :param str kind: one of ``logmel``, ``preemph`` (pre-emphasis and
        Butterworth low-pass before the log-mel), ``ratio``,
        ``logmel+ratio`` or ``raw``.
    :param tuple bands: optional band subset, evaluated directly on the
        filterbank (spectral kinds only).
    """

    kind: str = "logmel"
    spectrogram: SpectrogramConfig = field(default_factory=SpectrogramConfig)
    preemphasis: PreEmphasisConfig = field(default_factory=PreEmphasisConfig)
    butterworth_order: int = 5
    butterworth_cutoff: float = 400.0
    ratio_boundary: float = 400.0
    bands: tuple = None

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ConfigError(f"unknown feature kind <{self.kind}>")
        if self.bands is not None and self.kind in ("raw", "ratio"):
            raise ConfigError(
                f"band restriction isn't defined for <{self.kind}> features")

    def __call__(self, audio):
        return self.extract(audio)

    @property
    def n_bands(self):
        """Width of the matrices this extractor produces."""
        if self.kind in ("raw", "ratio"):
            return 1
        n = self.spectrogram.n_mel if self.bands is None else len(self.bands)
        return n + 1 if self.kind == "logmel+ratio" else n

    def extract(self, audio):
        if self.kind == "raw":
            return FeatureMatrix.from_audio(audio)
        if self.kind == "ratio":
            return frequency_ratio(
                audio, self.spectrogram, self.ratio_boundary)
        if self.kind == "preemph":
            audio = preemphasize(audio, self.preemphasis)
            audio = butterworth_lowpass(
                audio, self.butterworth_order, self.butterworth_cutoff)
        spect = log_mel_spectrogram(audio, self.spectrogram, self.bands)
        if self.kind == "logmel+ratio":
            ratio = frequency_ratio(
                audio, self.spectrogram, self.ratio_boundary)
            return stack_time([spect, ratio])
        return spect
