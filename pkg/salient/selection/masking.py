"""Views of dataset inputs in the input space of a (masked) network.

A branch named ``<input>_selected`` reads ``<input>`` restricted to the
mask; a branch whose width is smaller than its source matrix reads the
masked columns of that matrix.
"""
from ..dsp.spectral import FeatureExtractor, band_select
from ..exceptions import ConfigError, DataError

SELECTED_SUFFIX = "_selected"


def source_name(branch_name):
    if branch_name.endswith(SELECTED_SUFFIX):
        return branch_name[:-len(SELECTED_SUFFIX)]
    return branch_name


def needs_mask(branch, n_source_bands):
    return (branch.input_name.endswith(SELECTED_SUFFIX)
            or n_source_bands != branch.n_features)


def masked_inputs(example, spec, mask=None):
    """Inputs of ``example`` as consumed by the branches of ``spec``."""
    inputs = {}
    for branch in spec.branches:
        source = source_name(branch.input_name)
        if source not in example.inputs:
            raise DataError(
                f"example <{example.id}> has no input <{source}> for "
                f"branch <{branch.input_name}>")
        matrix = example.inputs[source]
        if needs_mask(branch, matrix.n_bands):
            if mask is None:
                raise DataError(
                    f"branch <{branch.input_name}> expects "
                    f"{branch.n_features} bands, input <{source}> has "
                    f"{matrix.n_bands} and no mask was given")
            matrix = band_select(matrix, mask)
        if matrix.n_bands != branch.n_features:
            raise DataError(
                f"branch <{branch.input_name}> expects {branch.n_features} "
                f"bands, got {matrix.n_bands} for example <{example.id}>")
        inputs[branch.input_name] = matrix
    return inputs


def apply_mask(dataset, spec, mask=None):
    """Dataset whose examples carry exactly the inputs of ``spec``."""
    return dataset.map_inputs(lambda e: masked_inputs(e, spec, mask))


def masked_extractors(sources, spec, mask=None):
    """Feature extractors computing each branch input straight from audio.

    Masked branches evaluate only the selected mel filters.

    :param dict sources: input name → :class:`FeatureExtractor` of the
        unmasked input.
    """
    extractors = {}
    for branch in spec.branches:
        source = source_name(branch.input_name)
        if source not in sources:
            raise ConfigError(
                f"no feature extractor for input <{source}> of branch "
                f"<{branch.input_name}>")
        extractor = sources[source]
        if needs_mask(branch, extractor.n_bands):
            if mask is None:
                raise DataError(
                    f"branch <{branch.input_name}> needs a mask")
            if extractor.kind not in ("logmel", "preemph"):
                raise ConfigError(
                    f"masked extraction isn't defined for <{extractor.kind}> "
                    "features")
            extractors[branch.input_name] = FeatureExtractor(
                kind=extractor.kind,
                spectrogram=extractor.spectrogram,
                preemphasis=extractor.preemphasis,
                butterworth_order=extractor.butterworth_order,
                butterworth_cutoff=extractor.butterworth_cutoff,
                ratio_boundary=extractor.ratio_boundary,
                bands=tuple(mask.indices))
        else:
            extractors[branch.input_name] = extractor
    return extractors
