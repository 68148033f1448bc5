import pandas as pd

from .base import Base
from ..exceptions import ConfigError
from ..loaders.dataset import save_dataset
from ..loaders.manifest import load_audio_dataset
from ..loaders.synthetic import synth_classification, synth_regression


class FeatureExtraction(Base):
    """Extract features of the WAV files listed in ``paths.manifest``.

    Every entry of ``features.inputs`` becomes one named input; without
    it the single input ``features.input_name`` holds ``features.kind``.
    """

    name = "features"

    def extract(self):
        features = self.config["features"]
        extractors = self.config.feature_extractors()
        for name, extractor in extractors.items():
            self.logger.info(
                f"extracting <{extractor.kind}> features "
                f"({extractor.n_bands} bands) as input <{name}>")
        return load_audio_dataset(
            self.require_path("manifest"),
            task=self.config.task,
            extractors=extractors,
            expected_rate=features["sample_rate"],
            expected_steps=features["expected_steps"])

    def transform(self, data):
        return data

    def make_artifacts(self, data):
        save_dataset(data, self.save_path / "dataset")
        self.logger.info(f"dataset written to {self.save_path / 'dataset'}")

    def make_tables(self, data):
        mismatched = data.metadata.get("target_length_mismatch")
        if mismatched:
            pd.DataFrame(mismatched).to_csv(
                self.save_path / "target_length_mismatch.csv", index=False)


class Synthesis(Base):
    """Generate a seeded synthetic dataset with known informative bands."""

    name = "synth"

    def extract(self):
        return dict(self.config["synth"])

    def transform(self, data):
        input_name = self.config["features"]["input_name"]
        common = dict(
            seed=data["seed"],
            n_examples=data["n_examples"],
            n_frames=data["n_frames"],
            n_bands=data["n_bands"],
            input_name=input_name)
        if self.config.task == "classification":
            dataset = synth_classification(
                planted=data["planted"], effect_size=data["effect_size"],
                **common)
            oracle = dataset.metadata["planted_bands"]
        elif self.config.task == "sequence_regression":
            dataset = synth_regression(
                driver_bands=data["driver_bands"],
                smoothing=data["smoothing"],
                offset=data["offset"],
                scale=data["scale"],
                **common)
            oracle = dataset.metadata["driver_bands"]
        else:
            raise ConfigError(f"can't synthesize a <{self.config.task}> task")
        self.logger.info(f"generated {dataset}, informative bands {oracle}")
        return dataset

    def make_artifacts(self, data):
        save_dataset(data, self.save_path / "dataset")

    def make_tables(self, data):
        key = ("planted_bands" if data.task == "classification"
               else "driver_bands")
        pd.DataFrame({"band_index": data.metadata[key]}).to_csv(
            self.save_path / "oracle.csv", index=False)
