import matplotlib
import pytest

from salient.entities.network import TrainConfig
from salient.loaders.synthetic import synth_classification, synth_regression


def pytest_configure(config):
    matplotlib.use("Agg")
    config.addinivalue_line(
        "markers", "slow: long-running end-to-end properties")


@pytest.fixture
def classification_data():
    return synth_classification(
        seed=3, n_examples=40, n_frames=6, n_bands=6, planted=(1, 4),
        effect_size=3.0)


@pytest.fixture
def regression_data():
    return synth_regression(
        seed=5, n_examples=20, n_frames=12, n_bands=5, driver_bands=(0, 2))


@pytest.fixture
def fast_train():
    return TrainConfig(learning_rate=0.01, batch_size=8, epochs=3)
