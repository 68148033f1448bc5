from .importance import (
    baseline_mask,
    bottom_n,
    ensemble_importances,
    importance,
    majority_vote_select,
    saliency_maps,
    top_n,
    unit_rule,
    vote)
from .sffs import ProxyConfig, sffs, sffs_model_count
from .masking import (
    SELECTED_SUFFIX,
    apply_mask,
    masked_extractors,
    masked_inputs)
