from types import SimpleNamespace

import numpy as np
import pytest

from mctrain.losses import LOGISTIC, SQUARED_ERROR
from mctrain.network import DenseLayer, Network, init_network
from mctrain.stability import (
    estimate_lipschitz,
    label_stability_bound,
    reports_to_csv,
    verify_input_stability,
    verify_label_stability,
)


def pair(inputs, targets, name="toy"):
    return SimpleNamespace(inputs=np.asarray(inputs, float), targets=np.asarray(targets, float), name=name)


def linear_net(weights):
    weights = np.atleast_2d(np.asarray(weights, float))
    return Network([DenseLayer(weights, np.zeros(weights.shape[0]), "identity")])


class TestLabelStabilityBound:
    def test_identical_labels(self):
        y = np.ones((5, 2))
        assert label_stability_bound(y, y, SQUARED_ERROR) == 0.0

    def test_hand_value(self):
        y = np.array([[1.0], [0.0]])
        yt = np.array([[1.1], [-0.1]])
        assert label_stability_bound(y, yt, SQUARED_ERROR) == pytest.approx(0.1414213562373095)

    def test_scales_linearly_with_perturbation(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=(8, 3))
        delta = rng.normal(size=(8, 3))
        b1 = label_stability_bound(y, y + delta, SQUARED_ERROR)
        b3 = label_stability_bound(y, y + 3.0 * delta, SQUARED_ERROR)
        assert b3 == pytest.approx(3.0 * b1)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            label_stability_bound(np.ones((2, 2)), np.ones((3, 2)), SQUARED_ERROR)


class TestVerifyLabelStability:
    def test_zero_perturbation(self):
        rng = np.random.default_rng(1)
        outputs = rng.normal(size=(6, 2))
        data = pair(np.zeros((6, 1)), rng.normal(size=(6, 2)))
        report = verify_label_stability(outputs, data, data.targets, SQUARED_ERROR)
        assert report.lhs == 0.0 and report.rhs == 0.0 and report.holds

    def test_random_trials_always_hold(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            n, k = int(rng.integers(2, 50)), int(rng.integers(1, 5))
            outputs = rng.normal(size=(n, k))
            data = pair(np.zeros((n, 1)), rng.normal(size=(n, k)))
            perturbed = data.targets + rng.normal(scale=rng.uniform(0.01, 2.0), size=(n, k))
            report = verify_label_stability(outputs, data, perturbed, SQUARED_ERROR)
            assert report.holds, report.summary()

    def test_single_sample_adversarial_perturbation(self):
        rng = np.random.default_rng(3)
        outputs = rng.normal(size=(50, 3))
        data = pair(np.zeros((50, 1)), rng.normal(size=(50, 3)))
        perturbed = data.targets.copy()
        perturbed[17] += 100.0  # all the damage on one sample
        report = verify_label_stability(outputs, data, perturbed, SQUARED_ERROR)
        assert report.holds
        assert report.detail.argmax() == 17

    def test_metric_without_distance_rejected(self):
        data = pair(np.zeros((2, 1)), [[1.0, -1.0], [1.0, 1.0]])
        with pytest.raises(ValueError, match="distance"):
            verify_label_stability(np.zeros((2, 2)), data, data.targets, LOGISTIC)


class TestVerifyInputStability:
    def test_linear_model_with_weight_norm_constant(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            d = int(rng.integers(2, 8))
            w = rng.normal(size=(1, d))
            net = linear_net(w)
            n = int(rng.integers(3, 30))
            x = rng.uniform(0, 1, size=(n, d))
            data = pair(x, rng.normal(size=(n, 1)))
            xt = x + rng.normal(scale=rng.uniform(0.001, 0.5), size=(n, d))
            report = verify_input_stability(net, data, xt, SQUARED_ERROR, lipschitz_k=np.linalg.norm(w))
            assert report.holds, report.summary()
            assert not report.k_estimated

    def test_zero_perturbation(self):
        net = linear_net([[1.0, 2.0]])
        data = pair(np.ones((4, 2)) * 0.5, np.zeros((4, 1)))
        report = verify_input_stability(net, data, data.inputs, SQUARED_ERROR, lipschitz_k=3.0)
        assert report.lhs == 0.0 and report.rhs == 0.0 and report.holds

    def test_nonpositive_constant_rejected(self):
        net = linear_net([[1.0]])
        data = pair([[0.5]], [[0.0]])
        with pytest.raises(ValueError):
            verify_input_stability(net, data, data.inputs, SQUARED_ERROR, lipschitz_k=0.0)

    def test_sampled_constant_on_sigmoid_network(self):
        rng = np.random.default_rng(5)
        net = init_network("mlp", (4, 6, 3), seed=0)
        x = rng.uniform(0, 1, size=(10, 4))
        data = pair(x, rng.uniform(0, 1, size=(10, 3)))
        scale = 0.05
        xt = np.clip(x + rng.normal(scale=scale, size=x.shape), 0, 1)
        first = verify_input_stability(
            net, data, xt, SQUARED_ERROR,
            lipschitz_k="estimate", n_pairs=50_000, seed=0, local_scale=scale,
        )
        assert first.k_estimated
        assert first.holds, first.summary()
        # the sampled constant keeps holding across fresh perturbations
        k = first.lipschitz_k
        for _ in range(500):
            xt = np.clip(x + rng.normal(scale=scale, size=x.shape), 0, 1)
            report = verify_input_stability(net, data, xt, SQUARED_ERROR, lipschitz_k=k)
            assert report.holds, report.summary()


class TestEstimateLipschitz:
    def test_linear_net_estimate_below_norm(self):
        w = np.array([[0.6, -0.8]])
        net = linear_net(w)
        est = estimate_lipschitz(net, n_pairs=20_000, seed=0)
        assert est <= 1.0 + 1e-12
        assert est > 0.95  # dense sampling gets close to the true constant

    def test_string_other_than_estimate_rejected(self):
        net = linear_net([[1.0]])
        data = pair([[0.5]], [[0.0]])
        with pytest.raises(ValueError, match="estimate"):
            verify_input_stability(net, data, data.inputs, SQUARED_ERROR, lipschitz_k="guess")


class TestCsv:
    def test_rows_and_header(self):
        rng = np.random.default_rng(6)
        outputs = rng.normal(size=(4, 2))
        data = pair(np.zeros((4, 1)), rng.normal(size=(4, 2)))
        reports = [
            verify_label_stability(outputs, data, data.targets + rng.normal(size=(4, 2)), SQUARED_ERROR)
            for _ in range(3)
        ]
        text = reports_to_csv(reports)
        lines = text.strip().split("\n")
        assert lines[0] == "trial,lhs,rhs,holds"
        assert len(lines) == 4
        assert lines[1].startswith("0,") and lines[1].endswith(",true")
