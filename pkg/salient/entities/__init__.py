from .audio import (
    AudioBuffer,
    FeatureMatrix,
    PreEmphasisConfig,
    SpectrogramConfig)
from .dataset import Dataset, LabeledExample
from .ensemble import Ensemble
from .network import (
    BranchSpec,
    GradientBundle,
    LayerSpec,
    NetworkSpec,
    Parameters,
    Prediction,
    TrainConfig)
from .reports import BenchmarkReport, ConfusionMatrix, EvaluationReport
from .selection import FeatureMask, ImportanceVector, VoteTally
