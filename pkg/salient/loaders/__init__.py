from .audio import load_wav, write_wav
from .dataset import load_dataset, save_dataset
from .manifest import load_audio_dataset, load_targets, write_targets
from .matrix import load_matrix, save_matrix
from .models import (
    load_ensemble,
    load_mask,
    load_model,
    save_ensemble,
    save_mask,
    save_model,
    save_tally)
from .synthetic import synth_classification, synth_regression
