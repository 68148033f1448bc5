from .architectures import (
    breathing_raw_spec,
    breathing_spectral_spec,
    build_spec,
    fusion_spec,
    msc_spec)
from .network import (
    Network,
    backward,
    count_parameters,
    forward,
    init,
    output_gradient,
    output_length)
from .optim import Adam
from .training import Trainer, train
