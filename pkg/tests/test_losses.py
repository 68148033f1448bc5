import numpy as np
import pytest
from numpy.testing import assert_allclose

from salient import losses
from salient.exceptions import ConfigError, DataError
from salient.losses import LossSpec

from .helpers import central_difference


class TestLossSpec:

    @pytest.mark.parametrize("identifier, kind, weight", [
        ("xent", "cross_entropy", 1.0),
        ("mse", "mse", 1.0),
        ("corr", "corr", 1.0),
        ("corr+mse", "corr_plus_mse", 1.0),
        ("corr+mse:0.25", "corr_plus_mse", 0.25)])
    def test_parse(self, identifier, kind, weight):
        spec = LossSpec.parse(identifier)
        assert spec.kind == kind
        assert spec.lambda_mse == weight

    def test_identifier_parses_back(self):
        spec = LossSpec("corr_plus_mse", 0.5)
        assert spec.identifier == "corr+mse:0.5"
        assert LossSpec.parse(spec.identifier) == spec

    def test_task(self):
        assert LossSpec().task == "classification"
        assert LossSpec("corr").task == "sequence_regression"

    @pytest.mark.parametrize("identifier", ["hinge", "corr+mse:abc"])
    def test_unknown(self, identifier):
        with pytest.raises(ConfigError):
            LossSpec.parse(identifier)

    def test_negative_weight(self):
        with pytest.raises(ConfigError):
            LossSpec("corr_plus_mse", -1.0)


class TestCrossEntropy:

    def test_value(self):
        assert losses.cross_entropy([0.25, 0.75], 1) == pytest.approx(
            -np.log(0.75))

    def test_clamped(self):
        assert losses.cross_entropy([1.0, 0.0], 1) == pytest.approx(
            -np.log(1e-12))
        assert np.all(losses.cross_entropy_grad([1.0, 0.0], 1) == 0.0)

    def test_label_range(self):
        with pytest.raises(DataError):
            losses.cross_entropy([0.5, 0.5], 2)

    @pytest.mark.parametrize(
        "posterior", [[0.5, 0.6], [0.2, 0.3], [np.nan, 1.0]])
    def test_posterior_must_sum_to_one(self, posterior):
        with pytest.raises(DataError, match="sums to"):
            losses.cross_entropy(posterior, 0)
        with pytest.raises(DataError, match="sums to"):
            losses.cross_entropy_grad(posterior, 0)

    def test_rounding_is_tolerated(self):
        posterior = [0.25, 0.75 + 5e-7]
        assert losses.cross_entropy(posterior, 0) == pytest.approx(
            -np.log(0.25))


class TestMSE:

    def test_value(self):
        assert losses.mse([1.0, 2.0, 3.0], [1.0, 0.0, 3.0]) == \
            pytest.approx(4.0 / 3.0)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            losses.mse([1.0, 2.0], [1.0])


class TestPearson:

    def test_perfect(self):
        x = np.linspace(0, 1, 10)
        assert losses.pearson(x, 3 * x + 2).r == pytest.approx(1.0)
        assert losses.pearson(x, -x).r == pytest.approx(-1.0)

    def test_scale_invariant(self):
        rng = np.random.default_rng(0)
        a, b = rng.standard_normal(20), rng.standard_normal(20)
        assert losses.pearson(a, b).r == pytest.approx(
            losses.pearson(5 * a - 1, b).r)

    def test_constant_sequence_is_degenerate(self):
        r, degenerate = losses.pearson(np.ones(5), np.arange(5.0))
        assert r == 0.0
        assert degenerate
        assert np.all(losses.pearson_grad(np.ones(5), np.arange(5.0)) == 0)

    def test_too_short(self):
        with pytest.raises(DataError):
            losses.pearson([1.0], [2.0])

    def test_corr_loss(self):
        x = np.arange(6.0)
        assert losses.corr_loss(x, x) == pytest.approx(0.0)
        assert losses.corr_loss(x, -x) == pytest.approx(2.0)

    def test_combined(self):
        x = np.arange(6.0)
        assert losses.combined_loss(x, x + 1, 0.5) == pytest.approx(0.5)


class TestGradients:

    @pytest.mark.parametrize("spec", [
        LossSpec("mse"), LossSpec("corr"), LossSpec("corr_plus_mse", 2.0)])
    def test_sequence_losses(self, spec):
        rng = np.random.default_rng(1)
        pred, target = rng.standard_normal(9), rng.standard_normal(9)
        numeric = central_difference(
            lambda: losses.loss_value(spec, pred, target), pred,
            np.arange(9))
        assert_allclose(losses.loss_grad(spec, pred, target), numeric,
                        rtol=1e-6, atol=1e-9)

    def test_cross_entropy(self):
        posterior = np.array([0.2, 0.5, 0.3])
        numeric = central_difference(
            lambda: losses.cross_entropy(posterior, 2), posterior,
            np.arange(3), eps=1e-7)
        assert_allclose(losses.cross_entropy_grad(posterior, 2), numeric,
                        rtol=1e-6)

    def test_batch_loss(self):
        outputs = np.array([[0.5, 0.5], [0.1, 0.9]])
        values, grads = losses.batch_loss(LossSpec(), outputs, [0, 1])
        assert_allclose(values, [-np.log(0.5), -np.log(0.9)])
        assert grads.shape == outputs.shape


class TestProperties:

    def test_affine_invariance(self):
        rng = np.random.default_rng(2)
        a, b = rng.standard_normal(30), rng.standard_normal(30)
        r = losses.pearson(a, b).r
        assert abs(losses.pearson(3.5 * a + 10.0, b).r - r) < 1e-9

    def test_corr_loss_range(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b = rng.standard_normal(8), rng.standard_normal(8)
            assert 0.0 <= losses.corr_loss(a, b) <= 2.0

    def test_combined_without_mse(self):
        rng = np.random.default_rng(4)
        a, b = rng.standard_normal(8), rng.standard_normal(8)
        assert losses.combined_loss(a, b, 0.0) == losses.corr_loss(a, b)
