from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigError, DataError


class AudioBuffer:
    """Mono waveform with its sampling rate.

    :param samples: amplitude values, expected in [-1, 1].
    :type samples: array-like
    :param int sample_rate: sampling rate in Hz.
    :raises DataError: if the buffer is empty or holds non-finite samples.
    :raises ConfigError: if ``sample_rate`` is not positive.
    """

    def __init__(self, samples, sample_rate):
        samples = np.asarray(samples, dtype=np.float64).reshape(-1)
        if samples.size == 0:
            raise DataError("audio buffer is empty")
        bad = np.flatnonzero(~np.isfinite(samples))
        if bad.size:
            raise DataError(f"non-finite audio sample at index {bad[0]}")
        if int(sample_rate) <= 0:
            raise ConfigError("sample_rate must be a positive integer")
        self.samples = samples
        self.sample_rate = int(sample_rate)

    def __len__(self):
        return self.samples.shape[0]

    def __repr__(self):
        return (
            f"AudioBuffer(n_samples={len(self)}, "
            f"sample_rate={self.sample_rate})")

    @property
    def duration(self):
        """duration in seconds"""
        return len(self) / self.sample_rate

    @property
    def nyquist(self):
        return self.sample_rate / 2

    def replace(self, samples):
        """New buffer with the same rate and different samples."""
        return AudioBuffer(samples, self.sample_rate)


@dataclass(frozen=True)
class PreEmphasisConfig:
    coefficient: float = 0.97

    def __post_init__(self):
        if not np.isfinite(self.coefficient) or not (
                0.0 <= self.coefficient < 1.0):
            raise ConfigError(
                "pre-emphasis coefficient must be finite and in [0, 1)")


@dataclass(frozen=True)
class SpectrogramConfig:
    """STFT and mel filterbank settings.

    Defaults give a 10 ms hop at 16 kHz and 128 mel bands.
    """

    n_fft: int = 512
    hop: int = 160
    n_mel: int = 128
    fmin: float = 20.0
    fmax: float = 8000.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if not 0 < self.hop <= self.n_fft:
            raise ConfigError("hop must satisfy 0 < hop <= n_fft")
        if self.n_mel < 1:
            raise ConfigError("n_mel must be at least 1")
        if not 0 < self.fmin < self.fmax:
            raise ConfigError("frequencies must satisfy 0 < fmin < fmax")
        if not self.log_floor > 0:
            raise ConfigError("log_floor must be positive")

    def check_rate(self, sample_rate):
        """Validate the frequency range against a sampling rate.

        :raises ConfigError: if ``fmax`` exceeds the Nyquist frequency.
        """
        if self.fmax > sample_rate / 2:
            raise ConfigError(
                f"fmax={self.fmax} Hz exceeds the Nyquist frequency "
                f"of {sample_rate / 2} Hz")

    def frame_count(self, n_samples):
        """number of STFT frames produced from ``n_samples`` samples"""
        if n_samples < self.n_fft:
            return 0
        return 1 + (n_samples - self.n_fft) // self.hop


class FeatureMatrix:
    """Time × band matrix consumed by the networks.

    :param values: array of shape (T, F).
    :param band_labels: one descriptor per column, a center frequency in Hz
        or a name such as ``"ratio"``.
    :param float frame_rate: frames per second.
    :raises DataError: if the matrix is empty, has non-finite cells or
        its labels do not match its width.
    """

    def __init__(self, values, band_labels, frame_rate):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise DataError("feature matrix must be two-dimensional")
        if values.shape[0] < 1:
            raise DataError("feature matrix needs at least one frame")
        band_labels = list(band_labels)
        if len(band_labels) != values.shape[1]:
            raise DataError(
                f"{len(band_labels)} band labels given for "
                f"{values.shape[1]} columns")
        if not np.all(np.isfinite(values)):
            row, col = np.argwhere(~np.isfinite(values))[0]
            raise DataError(
                f"non-finite feature value at frame {row}, band {col}")
        self.values = values
        self.band_labels = band_labels
        self.frame_rate = float(frame_rate)

    def __repr__(self):
        return (
            f"FeatureMatrix(T={self.n_frames}, F={self.n_bands}, "
            f"frame_rate={self.frame_rate})")

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (
            self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
            and [str(b) for b in self.band_labels]
            == [str(b) for b in other.band_labels]
            and self.frame_rate == other.frame_rate)

    @property
    def n_frames(self):
        return self.values.shape[0]

    @property
    def n_bands(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @classmethod
    def from_audio(cls, audio):
        """Raw waveform as a T × 1 matrix, one frame per sample."""
        return cls(
            audio.samples.reshape(-1, 1),
            ["waveform"],
            audio.sample_rate)
