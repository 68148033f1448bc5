from .benchmark import TimedPredictor, benchmark_latency
from .metrics import confusion, evaluate, uar
