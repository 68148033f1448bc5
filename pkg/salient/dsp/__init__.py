from .filters import butterworth_lowpass, butterworth_sos, preemphasize
from .spectral import (
    FeatureExtractor,
    band_select,
    frequency_ratio,
    log_mel_spectrogram,
    mel_center_frequencies,
    stack_time)
