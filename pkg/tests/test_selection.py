import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from salient.dsp.spectral import FeatureExtractor
from salient.entities.selection import FeatureMask, ImportanceVector
from salient.exceptions import ConfigError, DataError
from salient.loaders.synthetic import synth_classification
from salient.losses import LossSpec
from salient.nn.architectures import fusion_spec, msc_spec
from salient.nn.network import forward, init, output_gradient
from salient.selection import (
    ProxyConfig,
    apply_mask,
    baseline_mask,
    bottom_n,
    ensemble_importances,
    importance,
    majority_vote_select,
    masked_extractors,
    masked_inputs,
    saliency_maps,
    sffs,
    sffs_model_count,
    top_n,
    unit_rule,
    vote)

from .helpers import classifier_spec, regressor_spec, untrained_ensemble


def scores(*values, model_id=None):
    return ImportanceVector(np.array(values, dtype=float), "output",
                            model_id=model_id)


class TestRanking:

    def test_top_n(self):
        assert top_n(scores(6, 2, 9), 2) == [2, 0]

    def test_ties_go_to_lower_index(self):
        assert top_n(scores(5, 5, 1), 1) == [0]
        assert bottom_n(scores(3, 1, 1), 1) == [1]

    @pytest.mark.parametrize("n", [0, 4])
    def test_range(self, n):
        with pytest.raises(DataError):
            top_n(scores(1, 2, 3), n)


class TestVote:

    def test_votes_then_summed_scores(self):
        indices, tally = vote([scores(5, 4, 0, 0), scores(0, 4, 5, 0)], 2)
        assert indices == [1, 0]
        assert_array_equal(tally.votes, [1, 2, 1, 0])
        assert_allclose(tally.summed_scores, [5, 8, 5, 0])
        assert tally.n_models == 2

    def test_member_order_is_irrelevant(self):
        rng = np.random.default_rng(0)
        members = [scores(*rng.random(12)) for _ in range(7)]
        indices, tally = vote(members, 4)
        shuffled = [members[i] for i in rng.permutation(7)]
        indices_b, tally_b = vote(shuffled, 4)
        assert indices == indices_b
        assert_array_equal(tally.votes, tally_b.votes)
        assert_array_equal(tally.summed_scores, tally_b.summed_scores)

    def test_reverse(self):
        indices, _ = vote([scores(5, 4, 1, 0), scores(3, 4, 5, 0)], 1,
                          reverse=True)
        assert indices == [3]

    def test_needs_members(self):
        with pytest.raises(DataError):
            vote([], 1)

    def test_tally_frame(self):
        _, tally = vote([scores(1, 2, 3)], 1)
        frame = tally.to_frame()
        assert list(frame.columns) == ["band_index", "votes", "summed_score"]
        assert frame["votes"].tolist() == [0, 0, 1]


class TestImportance:

    def test_sum_of_absolute_output_gradients(self, classification_data):
        spec = classifier_spec()
        params = init(spec, 0)
        examples = classification_data.train[:5]
        iv = importance(spec, params, examples)
        expected = np.zeros(6)
        for example in examples:
            bundle = output_gradient(
                spec, params, example.inputs, example.target)
            expected += np.abs(bundle.input_grads["spect"]).sum(axis=0)
        assert_allclose(iv.scores, expected, rtol=1e-8)
        assert iv.unit_rule == "true_class"
        assert np.all(iv.scores >= 0)

    def test_unlabeled_uses_argmax(self, classification_data):
        spec = classifier_spec()
        examples = [e.with_inputs(e.inputs)
                    for e in classification_data.dev]
        for example in examples:
            example.target = None
        assert unit_rule(spec, examples) == "argmax"
        iv = importance(spec, init(spec, 0), examples)
        assert len(iv) == 6

    def test_loss_source_needs_labels(self, classification_data):
        spec = classifier_spec()
        examples = [e.with_inputs(e.inputs) for e in classification_data.dev]
        examples[0].target = None
        with pytest.raises(DataError, match="requires labels"):
            importance(spec, init(spec, 0), examples, source="loss",
                       loss=LossSpec())

    def test_loss_source(self, classification_data):
        spec = classifier_spec()
        iv = importance(spec, init(spec, 0), classification_data.dev,
                        source="loss", loss=LossSpec())
        assert iv.source == "loss"
        assert iv.unit_rule == "loss"

    def test_regression_sums_steps(self, regression_data):
        spec = regressor_spec()
        assert unit_rule(spec, regression_data.train) == "sum"
        maps = saliency_maps(spec, init(spec, 0), regression_data.train[:3])
        assert [m.shape for m in maps] == [(12, 5)] * 3

    def test_duplicated_examples_double_scores(self, classification_data):
        spec = classifier_spec()
        params = init(spec, 0)
        examples = classification_data.train[:6]
        single = importance(spec, params, examples)
        doubled = importance(spec, params, examples + examples)
        assert_array_equal(doubled.scores, 2 * single.scores)

    def test_perfect_fit_has_no_loss_gradient(self, regression_data):
        spec = regressor_spec()
        params = init(spec, 0)
        examples = []
        for example in regression_data.train:
            fitted = example.with_inputs(example.inputs)
            fitted.target = forward(spec, params, example.inputs).values
            examples.append(fitted)
        iv = importance(spec, params, examples, source="loss",
                        loss=LossSpec("mse"))
        assert np.all(iv.scores < 1e-8)

    def test_unknown_source(self, classification_data):
        spec = classifier_spec()
        with pytest.raises(ConfigError):
            importance(spec, init(spec, 0), classification_data.dev,
                       source="attention")

    def test_members_in_order(self, classification_data):
        ens = untrained_ensemble(classifier_spec(), n=3)
        ivs = ensemble_importances(ens, classification_data.dev)
        assert [iv.model_id for iv in ivs] == [0, 1, 2]


class TestMajorityVote:

    def test_precomputed_importances(self):
        mask, tally = majority_vote_select(
            None, None, n=2,
            importances=[scores(5, 4, 0, 0), scores(0, 4, 5, 0)])
        assert mask.indices == (0, 1)
        assert mask.origin == "output_grad"
        assert mask.n_bands == 4

    def test_ensemble(self, classification_data):
        ens = untrained_ensemble(classifier_spec(), n=3)
        mask, tally = majority_vote_select(
            ens, classification_data.train, n=3)
        assert len(mask) == 3
        assert tally.n_models == 3
        assert tally.votes.sum() == 9


class TestBaselines:

    def test_lowest(self):
        assert baseline_mask("lowest", 3, 10).indices == (0, 1, 2)

    def test_random_is_seeded(self):
        a = baseline_mask("random", 4, 20, seed=3)
        b = baseline_mask("random", 4, 20, seed=3)
        assert a.indices == b.indices
        assert len(set(a.indices)) == 4
        assert a.details["seed"] == 3

    def test_least_important(self):
        mask = baseline_mask(
            "least_important", 1, 4,
            importances=[scores(5, 4, 1, 0), scores(3, 4, 5, 0)])
        assert mask.indices == (3,)
        assert mask.origin == "least_important"

    def test_least_important_needs_input(self):
        with pytest.raises(ConfigError):
            baseline_mask("least_important", 1, 4)

    def test_unknown(self):
        with pytest.raises(ConfigError):
            baseline_mask("highest", 1, 4)

    def test_range(self):
        with pytest.raises(DataError):
            baseline_mask("lowest", 5, 4)


class TestSFFS:

    def test_model_count(self):
        assert sffs_model_count(128, 10) == 1235
        assert sffs_model_count(5, 1) == 5

    def test_recovers_planted_bands(self):
        dataset = synth_classification(
            seed=0, n_examples=2000, n_frames=1, n_bands=8, planted=(2, 5),
            effect_size=1.5)
        mask, trained, history = sffs(dataset, 2)
        assert mask.indices == (2, 5)
        assert mask.origin == "sffs"
        assert trained == 15
        assert history["models_trained"].tolist() == [8, 15]
        assert list(history.columns) == [
            "step", "band", "dev_uar", "models_trained"]

    def test_deterministic(self, classification_data):
        first = sffs(classification_data, 2, ProxyConfig())
        second = sffs(classification_data, 2, ProxyConfig())
        assert first[0].indices == second[0].indices
        assert first[2].equals(second[2])

    def test_needs_classification(self, regression_data):
        with pytest.raises(DataError):
            sffs(regression_data, 1)

    def test_range(self, classification_data):
        with pytest.raises(DataError):
            sffs(classification_data, 7)


class TestMasking:

    def test_masked_branch(self, classification_data):
        spec = msc_spec(2, filters=2, lstm_cells=2, dense_units=2)
        mask = FeatureMask((4, 1), "lowest", 6)
        example = classification_data.train[0]
        inputs = masked_inputs(example, spec, mask)
        assert_array_equal(inputs["spect"].values,
                           example.inputs["spect"].values[:, [1, 4]])

    def test_selected_branch_reads_source(self, classification_data):
        spec = fusion_spec({"spect": 6, "spect_selected": 2}, filters=2,
                           lstm_cells=2, dense_units=2)
        mask = FeatureMask((1, 4), "output_grad", 6)
        view = apply_mask(classification_data, spec, mask)
        assert view.input_names == ["spect", "spect_selected"]
        assert view.n_features("spect") == 6
        assert view.n_features("spect_selected") == 2
        assert len(view.train) == len(classification_data.train)

    def test_unmasked_spec_is_passthrough(self, classification_data):
        view = apply_mask(classification_data, classifier_spec())
        assert view.n_features("spect") == 6

    def test_missing_mask(self, classification_data):
        spec = msc_spec(2)
        with pytest.raises(DataError):
            apply_mask(classification_data, spec)

    def test_missing_input(self, classification_data):
        with pytest.raises(DataError, match="audio"):
            apply_mask(classification_data, msc_spec(6, input_name="audio"))

    def test_extractors(self):
        spec = fusion_spec({"spect": 128, "spect_selected": 3})
        mask = FeatureMask((7, 2, 40), "output_grad", 128)
        extractors = masked_extractors(
            {"spect": FeatureExtractor()}, spec, mask)
        assert extractors["spect"].bands is None
        assert extractors["spect_selected"].bands == (2, 7, 40)
        assert extractors["spect_selected"].n_bands == 3

    def test_extractors_need_spectral_features(self):
        spec = fusion_spec({"spect": 1, "spect_selected": 1})
        mask = FeatureMask((0,), "lowest", 1)
        with pytest.raises(ConfigError):
            masked_extractors({"spect": FeatureExtractor(kind="ratio")}, spec,
                              mask)

    def test_extractors_cover_every_source(self):
        spec = fusion_spec({"spect": 128, "ratio": 1})
        with pytest.raises(ConfigError, match="ratio"):
            masked_extractors({"spect": FeatureExtractor()}, spec)
