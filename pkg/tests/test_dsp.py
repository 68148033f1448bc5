import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import signal

from salient.dsp.filters import butterworth_lowpass, butterworth_sos, preemphasize
from salient.dsp.spectral import (
    FeatureExtractor,
    band_select,
    frequency_ratio,
    log_mel_spectrogram,
    mel_center_frequencies,
    stack_time)
from salient.entities.audio import (
    AudioBuffer,
    FeatureMatrix,
    PreEmphasisConfig,
    SpectrogramConfig)
from salient.exceptions import ConfigError, DataError

RATE = 16000


def tone(frequency, seconds=1.0, rate=RATE):
    t = np.arange(int(seconds * rate)) / rate
    return AudioBuffer(0.5 * np.sin(2 * np.pi * frequency * t), rate)


def gain_db(sos, frequency):
    _, response = signal.sosfreqz(sos, worN=[frequency], fs=RATE)
    return 20 * np.log10(np.abs(response[0]))


class TestPreEmphasis:

    def test_impulse_response(self):
        impulse = AudioBuffer([1.0, 0.0, 0.0, 0.0], RATE)
        out = preemphasize(impulse, PreEmphasisConfig(0.97))
        assert_allclose(out.samples, [1.0, -0.97, 0.0, 0.0], atol=1e-15)

    def test_keeps_length_and_rate(self):
        out = preemphasize(tone(300, 0.1))
        assert len(out) == 1600
        assert out.sample_rate == RATE

    def test_zero_coefficient_is_identity(self):
        audio = tone(300, 0.05)
        assert_array_equal(
            preemphasize(audio, PreEmphasisConfig(0.0)).samples,
            audio.samples)

    def test_coefficient_range(self):
        with pytest.raises(ConfigError):
            PreEmphasisConfig(1.0)


class TestButterworth:

    def test_minus_three_db_at_cutoff(self):
        sos = butterworth_sos(5, 400.0, RATE)
        assert gain_db(sos, 400.0) == pytest.approx(-3.0103, abs=0.1)

    def test_one_octave_above_cutoff(self):
        sos = butterworth_sos(5, 400.0, RATE)
        assert gain_db(sos, 800.0) == pytest.approx(-30.1, abs=1.0)

    def test_passband_is_flat(self):
        sos = butterworth_sos(5, 400.0, RATE)
        assert abs(gain_db(sos, 50.0)) < 0.01

    def test_sections(self):
        assert butterworth_sos(5, 400.0, RATE).shape == (3, 6)

    @pytest.mark.parametrize("order, cutoff", [
        (0, 400.0), (13, 400.0), (5, 8000.0), (5, 0.0)])
    def test_invalid_design(self, order, cutoff):
        with pytest.raises(ConfigError):
            butterworth_sos(order, cutoff, RATE)

    def test_attenuates_high_tone(self):
        low = butterworth_lowpass(tone(100, 0.5))
        high = butterworth_lowpass(tone(3000, 0.5))
        # skip the transient
        assert np.std(high.samples[2000:]) < 0.01 * np.std(low.samples[2000:])


class TestLogMel:

    def test_silence_is_log_floor(self):
        cfg = SpectrogramConfig()
        silence = AudioBuffer(np.zeros(RATE), RATE)
        spect = log_mel_spectrogram(silence, cfg)
        assert spect.shape == (97, 128)
        assert_allclose(spect.values, np.log(cfg.log_floor))

    def test_frame_count(self):
        cfg = SpectrogramConfig()
        assert cfg.frame_count(RATE) == 97
        assert cfg.frame_count(511) == 0
        assert log_mel_spectrogram(tone(440), cfg).n_frames == 97

    def test_tone_peaks_at_its_band(self):
        cfg = SpectrogramConfig(n_mel=40)
        spect = log_mel_spectrogram(tone(1000.0), cfg)
        peak = int(np.argmax(spect.values.mean(axis=0)))
        assert abs(mel_center_frequencies(cfg)[peak] - 1000.0) < 110.0

    def test_labels_and_frame_rate(self):
        cfg = SpectrogramConfig(n_mel=20)
        spect = log_mel_spectrogram(tone(440), cfg)
        assert spect.frame_rate == pytest.approx(100.0)
        assert spect.band_labels == [
            float(c) for c in mel_center_frequencies(cfg)]

    def test_band_restricted_extraction(self):
        cfg = SpectrogramConfig()
        audio = tone(700)
        bands = [0, 3, 17, 64, 127]
        full = log_mel_spectrogram(audio, cfg)
        restricted = log_mel_spectrogram(audio, cfg, bands=bands)
        selected = band_select(full, bands)
        assert restricted.shape == (97, 5)
        assert_allclose(restricted.values, selected.values, rtol=1e-12)
        assert restricted.band_labels == selected.band_labels

    def test_too_short(self):
        with pytest.raises(DataError):
            log_mel_spectrogram(AudioBuffer(np.zeros(100), RATE))

    def test_fmax_above_nyquist(self):
        with pytest.raises(ConfigError):
            log_mel_spectrogram(
                AudioBuffer(np.zeros(4000), 8000), SpectrogramConfig())


class TestFrequencyRatio:

    def test_low_tone_dominates(self):
        assert np.all(frequency_ratio(tone(200)).values > 1.0)

    def test_high_tone_dominates(self):
        assert np.all(frequency_ratio(tone(2000)).values < 1.0)

    def test_shape(self):
        ratio = frequency_ratio(tone(200))
        assert ratio.shape == (97, 1)
        assert ratio.band_labels == ["ratio"]


class TestBandSelect:

    def features(self):
        return FeatureMatrix(
            np.arange(12.0).reshape(3, 4), ["a", "b", "c", "d"], 100.0)

    def test_ascending_columns(self):
        out = band_select(self.features(), [3, 1])
        assert_array_equal(out.values, [[1, 3], [5, 7], [9, 11]])
        assert out.band_labels == ["b", "d"]

    @pytest.mark.parametrize("mask", [[], [4], [-1]])
    def test_invalid_mask(self, mask):
        with pytest.raises(DataError):
            band_select(self.features(), mask)


class TestStackTime:

    def test_concatenates_columns(self):
        a = FeatureMatrix(np.ones((3, 2)), ["x", "y"], 100.0)
        b = FeatureMatrix(np.zeros((3, 1)), ["z"], 100.0)
        out = stack_time([a, b])
        assert out.shape == (3, 3)
        assert out.band_labels == ["x", "y", "z"]

    def test_frame_mismatch(self):
        a = FeatureMatrix(np.ones((3, 2)), ["x", "y"], 100.0)
        b = FeatureMatrix(np.zeros((4, 1)), ["z"], 100.0)
        with pytest.raises(DataError):
            stack_time([a, b])


class TestFeatureExtractor:

    @pytest.mark.parametrize("kind, width", [
        ("logmel", 128), ("preemph", 128), ("ratio", 1),
        ("logmel+ratio", 129), ("raw", 1)])
    def test_widths(self, kind, width):
        extractor = FeatureExtractor(kind=kind)
        features = extractor(tone(300, 0.2))
        assert features.n_bands == width == extractor.n_bands

    def test_raw_keeps_samples(self):
        audio = tone(300, 0.01)
        features = FeatureExtractor(kind="raw")(audio)
        assert_array_equal(features.values[:, 0], audio.samples)
        assert features.frame_rate == RATE

    def test_band_subset(self):
        extractor = FeatureExtractor(bands=(2, 5))
        assert extractor.n_bands == 2
        assert extractor(tone(300, 0.2)).n_bands == 2

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            FeatureExtractor(kind="mfcc")

    def test_bands_on_raw(self):
        with pytest.raises(ConfigError):
            FeatureExtractor(kind="raw", bands=(0,))


class TestAudioBuffer:

    def test_rejects_non_finite(self):
        with pytest.raises(DataError, match="index 2"):
            AudioBuffer([0.0, 1.0, np.nan], RATE)

    def test_rejects_empty(self):
        with pytest.raises(DataError):
            AudioBuffer([], RATE)


class TestProperties:

    def test_preemphasis_is_linear(self):
        audio = tone(300, 0.05)
        scaled = AudioBuffer(-2.5 * audio.samples, RATE)
        assert_allclose(preemphasize(scaled).samples,
                        -2.5 * preemphasize(audio).samples, atol=1e-12)

    def test_butterworth_is_monotone(self):
        sos = butterworth_sos(5, 400.0, RATE)
        frequencies = np.linspace(20.0, 7000.0, 60)
        _, response = signal.sosfreqz(sos, worN=frequencies, fs=RATE)
        assert np.all(np.diff(np.abs(response)) <= 1e-12)

    def test_short_trailing_silence(self):
        # 50 hops past the first frame, no remainder
        audio = AudioBuffer(tone(500).samples[:512 + 50 * 160], RATE)
        padded = AudioBuffer(np.concatenate([audio.samples, np.zeros(100)]),
                             RATE)
        assert log_mel_spectrogram(padded).n_frames == \
            log_mel_spectrogram(audio).n_frames

    def test_complementary_selections_partition(self):
        features = FeatureMatrix(np.arange(20.0).reshape(4, 5),
                                 list("abcde"), 100.0)
        left = band_select(features, [0, 3])
        right = band_select(features, [1, 2, 4])
        merged = np.concatenate([left.values, right.values], axis=1)
        assert_array_equal(np.sort(merged, axis=1), features.values)
