import pathlib

import pandas as pd

from .base import Base
from ..entities.dataset import SPLITS
from ..evaluation.benchmark import benchmark_latency
from ..exceptions import ConfigError
from ..loaders.manifest import load_audio_dataset
from ..loaders.models import load_ensemble
from ..selection.masking import apply_mask, masked_extractors


class Benchmark(Base):
    """Single-threaded latency of one or more ensembles.

    With ``bench.include_features`` the timing starts from the WAV samples
    listed in ``paths.manifest``; otherwise it starts from the matrices of
    ``paths.dataset``.

    Selecting bands mostly shortens the convolutions. With the default
    kernel widths (1, 1) the LSTM and dense layers dominate, so ten of 128
    bands cut latency by only about 6%; widths (8, 6) cut it by about 45%.
    """

    name = "bench"

    def ensemble_paths(self):
        paths = self.config["bench"]["ensembles"] or [
            self.config["paths"]["ensemble"]]
        if not all(paths):
            raise ConfigError(
                "bench needs bench.ensembles or paths.ensemble")
        return [pathlib.Path(p) for p in paths]

    def extract(self):
        ensembles = {}
        for path in self.ensemble_paths():
            ensembles[str(path)] = load_ensemble(path)
        bench = self.config["bench"]
        if bench["include_features"]:
            features = self.config["features"]
            sources = self.config.feature_extractors()
            dataset = load_audio_dataset(
                self.require_path("manifest"),
                task=self.config.task,
                extractors=sources,
                expected_rate=features["sample_rate"],
                keep_audio=True)
        else:
            sources = None
            dataset = self.load_dataset()
        return dict(ensembles=ensembles, dataset=dataset, sources=sources)

    def transform(self, data):
        bench = self.config["bench"]
        dataset, sources = data["dataset"], data["sources"]
        reports = []
        for system, ens in data["ensembles"].items():
            if sources is None:
                view = apply_mask(dataset, ens.spec, ens.mask)
                extractors = None
            else:
                view = dataset
                extractors = masked_extractors(sources, ens.spec, ens.mask)
            examples = [e for split in SPLITS for e in view.split(split)]
            reports.append(benchmark_latency(
                ens, examples, extractors=extractors,
                repetitions=bench["repetitions"], system=system,
                max_examples=bench["max_examples"]))
        data["reports"] = reports
        return data

    def make_artifacts(self, data):
        pd.DataFrame([r.to_row() for r in data["reports"]]).to_csv(
            self.save_path / "bench.csv", index=False)
