"""Single-threaded wall-clock inference timing of an ensemble."""
import logging
import time

import numpy as np
from threadpoolctl import threadpool_limits

from ..ensemble import combine
from ..entities.reports import BenchmarkReport
from ..exceptions import ConfigError, DataError
from ..nn.network import Network

logger = logging.getLogger("salient.evaluation")

WARMUP_RUNS = 5


class TimedPredictor:
    """Callable running one end-to-end ensemble prediction.

    :param Ensemble ens: ensemble to time.
    :param dict extractors: input name → callable(AudioBuffer) →
        FeatureMatrix. When given, feature extraction is part of every
        timed prediction.
    """

    def __init__(self, ens, extractors=None):
        self.ens = ens
        self.network = Network(ens.spec)
        self.extractors = extractors
        self.names = ens.spec.input_names

    def inputs(self, example):
        if self.extractors is None:
            return example.select_inputs(self.names)
        if example.audio is None:
            raise DataError(
                f"example <{example.id}> carries no audio, feature "
                "extraction can't be timed")
        return {name: self.extractors[name](example.audio)
                for name in self.names}

    def __call__(self, example):
        batch = {name: value.values[None]
                 for name, value in self.inputs(example).items()}
        outputs = [self.network.predict(params, batch)[0]
                   for params in self.ens.members]
        return combine(outputs)


def benchmark_latency(
        ens,
        examples,
        extractors=None,
        repetitions=5,
        system="ensemble",
        max_examples=None):
    """Per-example latency of ensemble prediction on one thread.

    Five warm-up predictions are discarded. Every example is predicted
    ``repetitions`` times and its median kept; the report aggregates these
    medians over examples.

    :param extractors: see :class:`TimedPredictor`; None times the network
        only.
    :return BenchmarkReport: latencies in milliseconds.
    """
    if repetitions < 3:
        raise ConfigError("benchmark needs at least 3 repetitions")
    examples = list(examples)[:max_examples]
    if not examples:
        raise DataError("benchmark needs at least one example")
    missing = [n for n in ens.spec.input_names
               if extractors is not None and n not in extractors]
    if missing:
        raise ConfigError(f"no feature extractor for inputs {missing}")
    predictor = TimedPredictor(ens, extractors)
    with threadpool_limits(limits=1):
        for _ in range(WARMUP_RUNS):
            predictor(examples[0])
        medians = []
        for example in examples:
            runs = []
            for _ in range(repetitions):
                start = time.perf_counter()
                predictor(example)
                runs.append(time.perf_counter() - start)
            medians.append(1000.0 * float(np.median(runs)))
    medians = np.array(medians)
    report = BenchmarkReport(
        system=system,
        n_features=sum(b.n_features for b in ens.spec.branches),
        n_members=ens.size,
        parameter_count=predictor.network.count_parameters(),
        mean_ms=float(medians.mean()),
        median_ms=float(np.median(medians)),
        p95_ms=float(np.percentile(medians, 95)),
        examples_measured=len(examples),
        includes_feature_extraction=extractors is not None)
    logger.info(
        f"{system}: {report.median_ms:.3f} ms median over "
        f"{len(examples)} examples ({ens.size} members)")
    return report
