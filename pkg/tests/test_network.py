import numpy as np
import pytest

from mctrain.losses import (
    BINARY_CROSS_ENTROPY,
    LOGISTIC,
    SQUARED_ERROR,
    epsilon_weights,
)
from mctrain.network import (
    DenseLayer,
    Network,
    TrainConfig,
    TrainingError,
    accuracy,
    forward,
    init_network,
    load_network,
    loss_and_grad,
    save_network,
    sgd_train,
)


class Toy:
    """Minimal dataset stand-in: inputs, targets, name."""

    def __init__(self, inputs, targets, name="toy"):
        self.inputs = np.asarray(inputs, dtype=float)
        self.targets = np.asarray(targets, dtype=float)
        self.name = name


def fd_gradient(net, batches, metric, weights, step=1e-5):
    """Central finite differences on the flat parameter vector."""
    probe = net.copy()
    theta = probe.parameter_vector()
    grad = np.empty_like(theta)
    for j in range(theta.size):
        bumped = theta.copy()
        bumped[j] += step
        probe.set_parameter_vector(bumped)
        hi, _ = loss_and_grad(probe, batches, metric, weights)
        bumped[j] -= 2 * step
        probe.set_parameter_vector(bumped)
        lo, _ = loss_and_grad(probe, batches, metric, weights)
        grad[j] = (hi - lo) / (2 * step)
    return grad


def small_net(architecture, seed):
    if architecture == "mlp":
        return init_network("mlp", (3, 4, 2), seed)
    return init_network("residual", (3, 4, 4, 2), seed)


def relu_kink_margin(net, x):
    """Smallest |pre-activation| over all rectifier units for these inputs."""
    margin = np.inf
    acts = [np.asarray(x, dtype=float)]
    for idx, layer in enumerate(net.layers):
        z = acts[-1] @ layer.weights.T + layer.bias
        has_sc = net.shortcut is not None and net.shortcut[1] == idx
        if has_sc and not net.shortcut_after_activation:
            z = z + acts[net.shortcut[0] + 1]
        if layer.activation == "relu":
            margin = min(margin, float(np.abs(z).min()))
            a = np.maximum(z, 0.0)
        elif layer.activation == "sigmoid":
            a = 1.0 / (1.0 + np.exp(-z))
        else:
            a = z
        if has_sc and net.shortcut_after_activation:
            a = a + acts[net.shortcut[0] + 1]
        acts.append(a)
    return margin


def random_batches(rng, metric, net=None, n_datasets=2, width=3, classes=2):
    """Random batches; with a net given, resample until every rectifier
    pre-activation is clear of the kink (finite differences are only a
    valid gradient oracle where the loss is differentiable)."""
    while True:
        batches = []
        for _ in range(n_datasets):
            n = int(rng.integers(3, 8))
            x = rng.uniform(-1, 1, size=(n, width))
            if metric.kind == "logistic":
                y = rng.choice([-1.0, 1.0], size=(n, classes))
            else:
                y = np.eye(classes)[rng.integers(0, classes, size=n)]
            batches.append((x, y))
        if net is None:
            return batches
        stacked = np.vstack([b[0] for b in batches])
        if relu_kink_margin(net, stacked) > 1e-3:
            return batches


class TestInitNetwork:
    def test_same_seed_is_bit_identical(self):
        a = init_network("mlp", (400, 25, 10), seed=7)
        b = init_network("mlp", (400, 25, 10), seed=7)
        np.testing.assert_array_equal(a.parameter_vector(), b.parameter_vector())

    def test_mlp_parameter_count(self):
        net = init_network("mlp", (400, 25, 10), seed=0)
        assert net.n_parameters == 400 * 25 + 25 + 25 * 10 + 10  # 10285

    def test_residual_shortcut_widths(self):
        net = init_network("residual", (400, 64, 64, 10), seed=0)
        assert net.shortcut == (0, 1)
        assert net.layers[0].out_width == net.layers[1].out_width == 64

    def test_zero_size_layer_rejected(self):
        with pytest.raises(ValueError):
            init_network("mlp", (3, 0, 2), seed=0)

    def test_biases_start_at_zero(self):
        net = init_network("residual", (5, 4, 4, 3), seed=1)
        for layer in net.layers:
            assert not layer.bias.any()


class TestForward:
    def test_zero_parameters_give_half(self):
        net = Network([DenseLayer(np.zeros((2, 3)), np.zeros(2), "sigmoid")])
        np.testing.assert_array_equal(forward(net, np.ones((4, 3))), np.full((4, 2), 0.5))

    def test_relu_values(self):
        net = Network([DenseLayer(np.eye(2), np.zeros(2), "relu")])
        np.testing.assert_array_equal(forward(net, [[-3.0, 2.0]]), [[0.0, 2.0]])

    def test_zeroed_residual_layer_passes_identity(self):
        net = init_network("residual", (3, 4, 4, 2), seed=3)
        net.layers[1].weights[:] = 0.0
        net.layers[1].bias[:] = 0.0
        x = np.random.default_rng(0).uniform(0, 1, size=(6, 3))
        acts_in = forward(Network(net.layers[:1]), x)  # first-layer output
        block = forward(Network(net.layers[:2], shortcut=(0, 1)), x)
        np.testing.assert_allclose(block, acts_in)

    def test_dimension_mismatch(self):
        net = small_net("mlp", 0)
        with pytest.raises(ValueError):
            forward(net, np.ones((2, 5)))


class TestLossAndGrad:
    @pytest.mark.parametrize("architecture", ["mlp", "residual"])
    @pytest.mark.parametrize("metric", [SQUARED_ERROR, LOGISTIC, BINARY_CROSS_ENTROPY])
    def test_matches_finite_differences(self, architecture, metric):
        rng = np.random.default_rng(42)
        net = small_net(architecture, seed=5)
        batches = random_batches(rng, metric, net=net)
        weights = epsilon_weights(2, 0.05)
        _, grad = loss_and_grad(net, batches, metric, weights)
        fd = fd_gradient(net, batches, metric, weights)
        err = np.linalg.norm(grad - fd) / max(np.linalg.norm(grad), np.linalg.norm(fd))
        assert err < 1e-6

    def test_one_hot_weights_reduce_to_single_dataset(self):
        rng = np.random.default_rng(1)
        net = small_net("mlp", 2)
        batches = random_batches(rng, SQUARED_ERROR, n_datasets=3)
        l_multi, g_multi = loss_and_grad(net, batches, SQUARED_ERROR, np.array([1.0, 0.0, 0.0]))
        l_single, g_single = loss_and_grad(net, batches[:1], SQUARED_ERROR, np.array([1.0]))
        assert l_multi == pytest.approx(l_single)
        np.testing.assert_allclose(g_multi, g_single)

    def test_doubling_weights_doubles_loss_and_grad(self):
        rng = np.random.default_rng(2)
        net = small_net("mlp", 3)
        batches = random_batches(rng, BINARY_CROSS_ENTROPY, n_datasets=2)
        betas = np.array([0.4, 0.6])
        l1, g1 = loss_and_grad(net, batches, BINARY_CROSS_ENTROPY, betas)
        l2, g2 = loss_and_grad(net, batches, BINARY_CROSS_ENTROPY, 2.0 * betas)
        assert l2 == pytest.approx(2.0 * l1)
        np.testing.assert_allclose(g2, 2.0 * g1, rtol=1e-12)

    def test_post_activation_shortcut_gradient(self):
        # the alternative shortcut placement (identity added after the
        # target layer's activation) backpropagates correctly too
        rng = np.random.default_rng(7)
        net = init_network("residual", (3, 4, 4, 2), seed=8)
        net.shortcut_after_activation = True
        batches = random_batches(rng, SQUARED_ERROR, net=net)
        _, grad = loss_and_grad(net, batches, SQUARED_ERROR, np.array([0.7, 0.3]))
        fd = fd_gradient(net, batches, SQUARED_ERROR, np.array([0.7, 0.3]))
        err = np.linalg.norm(grad - fd) / max(np.linalg.norm(grad), np.linalg.norm(fd))
        assert err < 1e-6

    def test_weight_additivity(self):
        rng = np.random.default_rng(3)
        net = small_net("residual", 4)
        batches = random_batches(rng, SQUARED_ERROR, n_datasets=3)
        betas = np.array([0.2, 0.3, 0.5])
        _, combined = loss_and_grad(net, batches, SQUARED_ERROR, betas)
        parts = np.zeros_like(combined)
        for i, b in enumerate(betas):
            unit = np.zeros(3)
            unit[i] = 1.0
            _, g = loss_and_grad(net, batches, SQUARED_ERROR, unit)
            parts += b * g
        np.testing.assert_allclose(combined, parts, rtol=1e-10, atol=1e-15)


def separable_toy():
    rng = np.random.default_rng(8)
    a = rng.normal(loc=(-1.0, -1.0), scale=0.2, size=(10, 2))
    b = rng.normal(loc=(1.0, 1.0), scale=0.2, size=(10, 2))
    x = np.vstack([a, b])
    y = np.zeros((20, 2))
    y[:10, 0] = 1.0
    y[10:, 1] = 1.0
    return Toy(x, y, "separable")


class TestSgdTrain:
    def test_zero_learning_rate_is_identity(self):
        net = init_network("mlp", (2, 4, 2), seed=1)
        cfg = TrainConfig([separable_toy()], BINARY_CROSS_ENTROPY, np.array([1.0]),
                          epochs=3, batch_size=4, learning_rate=0.0, seed=0)
        trained, _ = sgd_train(net, cfg)
        np.testing.assert_array_equal(trained.parameter_vector(), net.parameter_vector())

    def test_one_epoch_decreases_separable_loss(self):
        net = init_network("mlp", (2, 4, 2), seed=6)
        cfg = TrainConfig([separable_toy()], BINARY_CROSS_ENTROPY, np.array([1.0]),
                          epochs=1, batch_size=4, learning_rate=0.5, seed=0)
        _, history = sgd_train(net, cfg)
        assert history.loss[0] < history.initial_loss

    def test_determinism_bit_for_bit(self):
        data = [separable_toy(), Toy(separable_toy().inputs + 0.1, separable_toy().targets, "shifted")]
        net = init_network("mlp", (2, 5, 2), seed=9)
        cfg = TrainConfig(data, BINARY_CROSS_ENTROPY, epsilon_weights(2, 0.01),
                          epochs=4, batch_size=3, learning_rate=0.3, seed=123)
        n1, h1 = sgd_train(net, cfg)
        n2, h2 = sgd_train(net, cfg)
        np.testing.assert_array_equal(n1.parameter_vector(), n2.parameter_vector())
        np.testing.assert_array_equal(h1.loss, h2.loss)
        np.testing.assert_array_equal(h1.dataset_means, h2.dataset_means)
        np.testing.assert_array_equal(h1.final_accuracy, h2.final_accuracy)

    def test_history_lengths_match_epochs(self):
        net = init_network("mlp", (2, 3, 2), seed=0)
        cfg = TrainConfig([separable_toy()], SQUARED_ERROR, np.array([1.0]),
                          epochs=5, batch_size=8, learning_rate=0.1, seed=1)
        _, history = sgd_train(net, cfg)
        assert history.loss.shape == (5,)
        assert history.dataset_means.shape == (5, 1)
        assert history.final_accuracy.shape == (1,)

    def test_full_batch_descent_on_linear_least_squares(self):
        # identity-activation single layer + squared error: gradient descent
        # must decrease the loss every epoch at a small step size
        rng = np.random.default_rng(4)
        x = rng.normal(size=(12, 3))
        w_true = rng.normal(size=(2, 3))
        data = Toy(x, x @ w_true.T, "linear")
        net = Network([DenseLayer(np.zeros((2, 3)), np.zeros(2), "identity")])
        cfg = TrainConfig([data], SQUARED_ERROR, np.array([1.0]),
                          epochs=20, batch_size=12, learning_rate=0.05, seed=0)
        _, history = sgd_train(net, cfg)
        losses = np.concatenate([[history.initial_loss], history.loss])
        assert (np.diff(losses) < 0).all()

    def test_non_finite_loss_reports_coordinates(self):
        # an absurd step size overflows the parameters on the first update,
        # so the second minibatch sees an infinite loss
        data = Toy([[1.0], [1.0]], [[0.0], [0.0]], "blowup")
        net = Network([DenseLayer(np.array([[1.0]]), np.zeros(1), "identity")])
        cfg = TrainConfig([data], SQUARED_ERROR, np.array([1.0]),
                          epochs=1, batch_size=1, learning_rate=1e308, seed=0)
        with np.errstate(over="ignore"):
            with pytest.raises(TrainingError) as err:
                sgd_train(net, cfg)
        assert err.value.epoch == 1 and err.value.batch == 1

    def test_param_box_projection(self):
        net = init_network("mlp", (2, 3, 2), seed=2)
        cfg = TrainConfig([separable_toy()], SQUARED_ERROR, np.array([1.0]),
                          epochs=2, batch_size=4, learning_rate=1.0, seed=0, param_box=0.05)
        trained, _ = sgd_train(net, cfg)
        assert np.abs(trained.parameter_vector()).max() <= 0.05 + 1e-15


class TestAccuracy:
    def test_perfect_outputs(self):
        targets = np.eye(4)
        net = Network([DenseLayer(np.eye(4), np.zeros(4), "identity")])
        assert accuracy(net, Toy(targets, targets)) == 1.0

    def test_constant_outputs_tie_break_to_zero(self):
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 3, size=50)
        targets = np.eye(3)[labels]
        net = Network([DenseLayer(np.zeros((3, 3)), np.zeros(3), "identity")])
        acc = accuracy(net, Toy(np.ones((50, 3)), targets))
        assert acc == pytest.approx(np.mean(labels == 0))

    def test_empty_dataset_rejected(self):
        net = small_net("mlp", 0)
        with pytest.raises(ValueError):
            accuracy(net, Toy(np.empty((0, 3)), np.empty((0, 2))))


class TestCheckpoint:
    def test_roundtrip_is_exact(self, tmp_path):
        net = init_network("residual", (5, 4, 4, 3), seed=11)
        path = tmp_path / "net.txt"
        save_network(net, path)
        loaded = load_network(path)
        np.testing.assert_array_equal(loaded.parameter_vector(), net.parameter_vector())
        assert loaded.shortcut == net.shortcut
        assert loaded.shortcut_after_activation == net.shortcut_after_activation
        assert [l.activation for l in loaded.layers] == [l.activation for l in net.layers]

    def test_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("not a checkpoint\n")
        with pytest.raises(ValueError):
            load_network(path)
