import numpy as np
import pytest

from greenfl.errors import EmptyClientData
from greenfl.workload import (
    ModelParams,
    SyntheticDataset,
    TrainConfig,
    evaluate,
    local_train,
    loss_and_grad,
    make_blobs,
    steps_per_round,
    update_payload_bytes,
)


def tiny_blobs(seed=0):
    return make_blobs(num_classes=3, num_features=8, samples_per_class=40, separation=6.0, seed=seed)


def finite_difference_grad(params, features, labels, eps=1e-5):
    grad_w = np.zeros_like(params.weights)
    grad_b = np.zeros_like(params.bias)

    def loss_at(w, b):
        return loss_and_grad(ModelParams(w, b), features, labels)[0]

    for idx in np.ndindex(params.weights.shape):
        w = params.weights.copy()
        w[idx] += eps
        up = loss_at(w, params.bias)
        w[idx] -= 2 * eps
        down = loss_at(w, params.bias)
        grad_w[idx] = (up - down) / (2 * eps)
    for i in range(params.bias.size):
        b = params.bias.copy()
        b[i] += eps
        up = loss_at(params.weights, b)
        b[i] -= 2 * eps
        down = loss_at(params.weights, b)
        grad_b[i] = (up - down) / (2 * eps)
    return grad_w, grad_b


@pytest.mark.parametrize("seed", [0, 3, 11])
def test_analytic_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(7, 5))
    labels = rng.integers(0, 4, size=7)
    params = ModelParams(rng.normal(size=(4, 5)) * 0.3, rng.normal(size=4) * 0.3)
    _, grad_w, grad_b = loss_and_grad(params, features, labels)
    fd_w, fd_b = finite_difference_grad(params, features, labels)
    scale = max(np.abs(fd_w).max(), np.abs(fd_b).max())
    assert np.abs(grad_w - fd_w).max() / scale < 1e-4
    assert np.abs(grad_b - fd_b).max() / scale < 1e-4


def test_zero_learning_rate_leaves_params_bitwise_unchanged():
    data = tiny_blobs()
    params = ModelParams.zeros(3, 8)
    trained, steps = local_train(params, data, TrainConfig(local_epochs=2, batch_size=16, learning_rate=0.0))
    assert steps == 2 * -(-data.num_samples // 16)
    np.testing.assert_array_equal(trained.weights, params.weights)
    np.testing.assert_array_equal(trained.bias, params.bias)


def test_single_step_applies_gradient_exactly():
    rng = np.random.default_rng(5)
    data = SyntheticDataset(rng.normal(size=(1, 4)), np.array([1]), 3)
    params = ModelParams(rng.normal(size=(3, 4)), rng.normal(size=3))
    lr = 0.2
    _, grad_w, grad_b = loss_and_grad(params, data.features, data.labels)
    trained, steps = local_train(params, data, TrainConfig(local_epochs=1, batch_size=1, learning_rate=lr))
    assert steps == 1
    np.testing.assert_allclose(trained.weights, params.weights - lr * grad_w, rtol=1e-12)
    np.testing.assert_allclose(trained.bias, params.bias - lr * grad_b, rtol=1e-12)


def test_separable_classes_reach_high_training_accuracy():
    data = make_blobs(num_classes=2, num_features=10, samples_per_class=200, separation=8.0, seed=1)
    params = ModelParams.zeros(2, 10)
    trained, _ = local_train(params, data, TrainConfig(local_epochs=5, batch_size=40, learning_rate=0.2))
    assert evaluate(trained, data) >= 0.99


def test_evaluate_perfect_prototype_classifier():
    # weights equal to class means -> nearest-mean behaviour on noiseless points
    means = np.eye(4, 12) * 9.0
    data = SyntheticDataset(means, np.arange(4), 4)
    params = ModelParams(means, np.zeros(4))
    assert evaluate(params, data) == 1.0


def test_evaluate_random_params_near_chance():
    accs = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        features = rng.normal(size=(2000, 6))
        labels = rng.integers(0, 10, size=2000)
        params = ModelParams(rng.normal(size=(10, 6)), rng.normal(size=10))
        accs.append(evaluate(params, SyntheticDataset(features, labels, 10)))
    assert np.mean(accs) == pytest.approx(0.1, abs=0.05)


def test_empty_data_rejected():
    empty = SyntheticDataset(np.empty((0, 3)), np.empty(0, dtype=np.int64), 2)
    with pytest.raises(EmptyClientData):
        evaluate(ModelParams.zeros(2, 3), empty)
    with pytest.raises(EmptyClientData):
        local_train(ModelParams.zeros(2, 3), empty, TrainConfig())


def test_payload_bytes_counts_32bit_values():
    assert update_payload_bytes(ModelParams.zeros(10, 90)) == (900 + 10) * 4
    assert update_payload_bytes(ModelParams.zeros(1, 1)) == 8


def test_payload_bytes_shape_invariant():
    a = ModelParams.zeros(5, 7)
    b = ModelParams(np.ones((5, 7)), np.ones(5))
    assert update_payload_bytes(a) == update_payload_bytes(b)


def test_steps_per_round_formula():
    cfg = TrainConfig(local_epochs=10, batch_size=600)
    assert steps_per_round(10_000, cfg) == 10 * 17
    assert steps_per_round(600, cfg) == 10


def test_training_is_deterministic_for_fixed_seed():
    data = tiny_blobs()
    cfg = TrainConfig(local_epochs=3, batch_size=16, learning_rate=0.1, seed=99)
    a, _ = local_train(ModelParams.zeros(3, 8), data, cfg)
    b, _ = local_train(ModelParams.zeros(3, 8), data, cfg)
    np.testing.assert_array_equal(a.weights, b.weights)
    np.testing.assert_array_equal(a.bias, b.bias)


def test_mean_loss_does_not_increase_on_separable_data():
    improved = 0
    for seed in range(10):
        data = make_blobs(num_classes=3, num_features=6, samples_per_class=80, separation=7.0, seed=seed)
        params = ModelParams.zeros(3, 6)
        before = loss_and_grad(params, data.features, data.labels)[0]
        trained, _ = local_train(
            params, data, TrainConfig(local_epochs=1, batch_size=40, learning_rate=0.05, seed=seed)
        )
        after = loss_and_grad(trained, data.features, data.labels)[0]
        if after <= before:
            improved += 1
    assert improved == 10
