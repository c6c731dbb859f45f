import numpy as np
import pytest

from dfr.errors import ConfigurationError
from dfr.losses import LossWeights, content_loss, gram, style_loss, total_loss
from dfr.vgg import LayerSelection

from oracles import central_diff, gram_naive, relative_errors

RNG = np.random.default_rng


def f32(x):
    return np.asarray(x, dtype=np.float32)


class TestGram:
    def test_single_channel_of_ones(self):
        x = np.ones((1, 1, 2, 2), np.float32)
        np.testing.assert_array_equal(gram(x), f32([[4.0]]))

    def test_orthogonal_channels(self):
        x = np.zeros((1, 2, 2, 2), np.float32)
        x[0, 0].flat[0] = 1.0
        x[0, 1].flat[1] = 1.0
        np.testing.assert_array_equal(gram(x), np.eye(2, dtype=np.float32))

    def test_matches_naive_oracle(self):
        x = RNG(0).standard_normal((1, 4, 3, 3)).astype(np.float32)
        assert np.abs(gram(x).astype(np.float64) - gram_naive(x)).max() < 1e-4

    def test_exactly_symmetric(self):
        rng = RNG(1)
        for _ in range(20):
            x = rng.standard_normal((1, 6, 4, 5)).astype(np.float32)
            g = gram(x)
            np.testing.assert_array_equal(g, g.T)

    def test_positive_semidefinite(self):
        rng = RNG(2)
        for _ in range(10):
            x = rng.standard_normal((1, 5, 4, 4)).astype(np.float32)
            eig = np.linalg.eigvalsh(gram(x).astype(np.float64))
            assert eig.min() >= -1e-4

    def test_batch_must_be_one(self):
        with pytest.raises(ConfigurationError):
            gram(np.zeros((2, 3, 4, 4), np.float32))


class TestContentLoss:
    def test_minimum_at_target(self):
        x = RNG(3).standard_normal((1, 2, 3, 3)).astype(np.float32)
        loss, grad = content_loss(x, x.copy())
        assert loss == 0.0
        assert not grad.any()

    def test_hand_values(self):
        loss, grad = content_loss(
            f32([3]).reshape(1, 1, 1, 1), f32([1]).reshape(1, 1, 1, 1)
        )
        assert loss == pytest.approx(2.0)
        assert grad[0, 0, 0, 0] == pytest.approx(2.0)

    def test_gradient_matches_finite_differences(self):
        rng = RNG(4)
        x = rng.standard_normal((1, 2, 4, 4)).astype(np.float32)
        target = rng.standard_normal((1, 2, 4, 4)).astype(np.float32)
        _, analytic = content_loss(x, target)
        numeric = central_diff(lambda t: content_loss(f32(t), target)[0], x.copy(), h=1e-2)
        assert relative_errors(analytic, numeric).max() < 1e-3

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            content_loss(np.zeros((1, 1, 2, 2), np.float32), np.zeros((1, 1, 2, 3), np.float32))


def single_layer_selection(name="conv1_1", weight=1.0):
    return LayerSelection(
        content_layer="conv4_2", style_layers=(name,), style_layer_weights=(weight,)
    )


class TestStyleLoss:
    def test_zero_at_matching_grams(self):
        x = RNG(5).standard_normal((1, 3, 4, 4)).astype(np.float32)
        sel = single_layer_selection()
        loss, grads, per_layer = style_loss({"conv1_1": x}, {"conv1_1": gram(x)}, sel)
        assert loss == 0.0
        assert per_layer == [0.0]
        assert not grads["conv1_1"].any()

    def test_scaling_factor_hand_value(self):
        # one channel, four positions, features all ones: G = [[4]]; against
        # a zero target gram the loss is 1/(4*1*16) * 16 = 0.25
        f = np.ones((1, 1, 2, 2), np.float32)
        sel = single_layer_selection()
        loss, _, _ = style_loss({"conv1_1": f}, {"conv1_1": f32([[0.0]])}, sel)
        assert loss == pytest.approx(0.25)

    def test_layer_weight_scales_linearly(self):
        x = RNG(6).standard_normal((1, 2, 4, 4)).astype(np.float32)
        tg = {"conv1_1": np.zeros((2, 2), np.float32)}
        l1, g1, _ = style_loss({"conv1_1": x}, tg, single_layer_selection(weight=1.0))
        l3, g3, _ = style_loss({"conv1_1": x}, tg, single_layer_selection(weight=3.0))
        assert l3 == pytest.approx(3.0 * l1, rel=1e-6)
        np.testing.assert_allclose(g3["conv1_1"], 3.0 * g1["conv1_1"], rtol=1e-5)

    def test_gradient_matches_finite_differences(self):
        rng = RNG(7)
        x = rng.standard_normal((1, 3, 4, 4)).astype(np.float32)
        target = gram(rng.standard_normal((1, 3, 4, 4)).astype(np.float32))
        sel = single_layer_selection()
        _, grads, _ = style_loss({"conv1_1": x}, {"conv1_1": target}, sel)

        def probe(t):
            return style_loss({"conv1_1": np.asarray(t)}, {"conv1_1": target}, sel)[0]

        # float64 probe: the loss is quartic in the features, so the small
        # step kills O(h^2) truncation without hitting float32 quantization
        numeric = central_diff(probe, x.astype(np.float64), h=1e-3)
        assert relative_errors(grads["conv1_1"], numeric).max() < 1e-3

    def test_missing_layer_rejected(self):
        sel = single_layer_selection()
        with pytest.raises(ConfigurationError, match="conv1_1"):
            style_loss({}, {"conv1_1": np.zeros((1, 1), np.float32)}, sel)
        with pytest.raises(ConfigurationError, match="conv1_1"):
            style_loss({"conv1_1": np.zeros((1, 1, 2, 2), np.float32)}, {}, sel)

    def test_target_gram_shape_rejected(self):
        sel = single_layer_selection()
        with pytest.raises(ConfigurationError, match="gram"):
            style_loss(
                {"conv1_1": np.zeros((1, 2, 2, 2), np.float32)},
                {"conv1_1": np.zeros((3, 3), np.float32)},
                sel,
            )


class TestLossWeights:
    def test_defaults(self):
        w = LossWeights()
        assert w.alpha == 1e4
        assert w.beta == 0.01

    def test_negative_rejected(self):
        with pytest.raises(ConfigurationError):
            LossWeights(alpha=-1.0)


class TestTotalLoss:
    def _fixture(self, seed=8):
        rng = RNG(seed)
        sel = LayerSelection(
            content_layer="conv4_2",
            style_layers=("conv1_1", "conv2_1"),
            style_layer_weights=(1.0, 1.0),
        )
        feats = {
            "conv4_2": rng.standard_normal((1, 3, 4, 4)).astype(np.float32),
            "conv1_1": rng.standard_normal((1, 2, 4, 4)).astype(np.float32),
            "conv2_1": rng.standard_normal((1, 4, 2, 2)).astype(np.float32),
        }
        content_target = {"conv4_2": rng.standard_normal((1, 3, 4, 4)).astype(np.float32)}
        grams = {
            "conv1_1": gram(rng.standard_normal((1, 2, 4, 4)).astype(np.float32)),
            "conv2_1": gram(rng.standard_normal((1, 4, 2, 2)).astype(np.float32)),
        }
        return sel, feats, content_target, grams

    def test_joint_minimum_is_zero(self):
        sel, feats, _, _ = self._fixture()
        content_target = {"conv4_2": feats["conv4_2"].copy()}
        grams = {n: gram(feats[n]) for n in sel.style_layers}
        report, grads = total_loss(feats, content_target, grams, LossWeights(), sel)
        assert report.total == 0.0
        for g in grads.values():
            assert not g.any()

    def test_alpha_zero_drops_content(self):
        sel, feats, content_target, grams = self._fixture()
        weights = LossWeights(alpha=0.0, beta=0.7)
        report, grads = total_loss(feats, content_target, grams, weights, sel)
        assert report.total == pytest.approx(0.7 * report.style, rel=1e-6)
        assert not grads["conv4_2"].any()

    def test_report_composition(self):
        sel, feats, content_target, grams = self._fixture()
        weights = LossWeights(alpha=1e4, beta=0.01)
        report, _ = total_loss(feats, content_target, grams, weights, sel)
        c, _ = content_loss(feats["conv4_2"], content_target["conv4_2"])
        s, _, per_layer = style_loss(feats, grams, sel)
        assert report.content == pytest.approx(c)
        assert report.style == pytest.approx(s)
        assert report.per_style_layer == pytest.approx(per_layer)
        assert report.total == pytest.approx(1e4 * c + 0.01 * s, rel=1e-4)
        assert report.total >= 0.0

    def test_shared_layer_accumulates_both_roles(self):
        rng = RNG(9)
        sel = LayerSelection(
            content_layer="conv2_1", style_layers=("conv2_1",), style_layer_weights=(1.0,)
        )
        feats = {"conv2_1": rng.standard_normal((1, 3, 4, 4)).astype(np.float32)}
        content_target = {"conv2_1": rng.standard_normal((1, 3, 4, 4)).astype(np.float32)}
        grams = {"conv2_1": gram(rng.standard_normal((1, 3, 4, 4)).astype(np.float32))}
        weights = LossWeights(alpha=2.0, beta=3.0)
        _, grads = total_loss(feats, content_target, grams, weights, sel)
        _, cgrad = content_loss(feats["conv2_1"], content_target["conv2_1"])
        _, sgrads, _ = style_loss(feats, grams, sel)
        want = 2.0 * cgrad + 3.0 * sgrads["conv2_1"]
        np.testing.assert_allclose(grads["conv2_1"], want, rtol=1e-5, atol=1e-7)

    def test_total_nonnegative_randomized(self):
        rng = RNG(10)
        sel = single_layer_selection()
        for _ in range(20):
            feats = {
                "conv4_2": rng.standard_normal((1, 2, 2, 2)).astype(np.float32),
                "conv1_1": rng.standard_normal((1, 2, 2, 2)).astype(np.float32),
            }
            ct = {"conv4_2": rng.standard_normal((1, 2, 2, 2)).astype(np.float32)}
            tg = {"conv1_1": gram(rng.standard_normal((1, 2, 2, 2)).astype(np.float32))}
            report, _ = total_loss(feats, ct, tg, LossWeights(), sel)
            assert report.total >= 0.0
