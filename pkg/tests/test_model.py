import numpy as np
import pytest

from oracles import param_fd_check
from pplearn.datagen import Dataset
from pplearn.losses import LossConfig
from pplearn.model import ModelParams, evaluate, forward, forward_backward, init_params

COUNTS = np.array([50, 12, 3])


def batch(seed, B=6, D=4, C=3):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(B, D)), rng.integers(C, size=B), rng.uniform(0.1, 2.0, size=B)


@pytest.mark.parametrize("arch", ["linear", "mlp"])
@pytest.mark.parametrize("family", ["ce", "focal", "ldam", "cri"])
def test_backprop_matches_finite_differences(arch, family):
    X, y, w = batch(1)
    cfg = LossConfig(family, gamma=1.5, t_threshold=1e-6)
    params = init_params(4, 3, arch, hidden=5, rng=2)

    def fn(p):
        return forward_backward(p, X, y, w, cfg, COUNTS)[0]

    _, grads = forward_backward(params, X, y, w, cfg, COUNTS)
    assert param_fd_check(params, fn, grads) <= 1.0


def test_mixed_targets_match_finite_differences():
    X, y, _ = batch(3)
    targets = np.stack([y, (y + 1) % 3], axis=1)
    weights = np.random.default_rng(4).uniform(0, 1, size=targets.shape)
    cfg = LossConfig("cri", gamma=2.0)
    params = init_params(4, 3, "mlp", hidden=3, rng=5)
    _, grads = forward_backward(params, X, targets, weights, cfg, COUNTS)
    assert param_fd_check(params, lambda p: forward_backward(p, X, targets, weights, cfg, COUNTS)[0], grads) <= 1.0


def test_softmax_ce_textbook_identity():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(1, 5))
    params = init_params(5, 4, "linear", rng=1)
    z = x @ params.layers[0][0] + params.layers[0][1]
    p = np.exp(z - z.max())
    p /= p.sum()
    onehot = np.eye(4)[[2]]
    _, grads = forward_backward(params, x, [2], [1.0], LossConfig("ce"), [1, 1, 1, 1])
    np.testing.assert_allclose(grads[0][0], np.outer(x, p - onehot), atol=1e-15)
    np.testing.assert_allclose(grads[0][1], (p - onehot)[0], atol=1e-15)


def test_zero_weight_member_contributes_nothing():
    X, y, w = batch(7)
    params = init_params(4, 3, "mlp", hidden=4, rng=0)
    cfg = LossConfig("focal")
    w0 = w.copy()
    w0[2] = 0.0
    total_a, grads_a = forward_backward(params, X, y, w0, cfg, COUNTS)
    keep = np.arange(len(y)) != 2
    total_b, grads_b = forward_backward(params, X[keep], y[keep], w0[keep], cfg, COUNTS)
    assert total_a == pytest.approx(total_b, rel=1e-14)
    for (gWa, gba), (gWb, gbb) in zip(grads_a, grads_b):
        np.testing.assert_allclose(gWa, gWb, rtol=1e-13, atol=1e-16)
        np.testing.assert_allclose(gba, gbb, rtol=1e-13, atol=1e-16)


def test_non_finite_loss_raises():
    params = init_params(2, 2, rng=0)
    params.layers[0][0][:] = np.inf
    with pytest.raises(FloatingPointError):
        forward_backward(params, np.ones((1, 2)), [0], [1.0], LossConfig("ce"), [1, 1])


def test_shape_mismatch():
    params = init_params(2, 2, rng=0)
    with pytest.raises(ValueError):
        forward_backward(params, np.ones((2, 2)), [0, 1], [1.0], LossConfig("ce"), [1, 1])


def test_init_bounds_and_shapes():
    params = init_params(16, 3, "mlp", hidden=8, rng=0)
    (W0, b0), (W1, b1) = params.layers
    assert W0.shape == (16, 8) and W1.shape == (8, 3)
    assert np.abs(W0).max() <= 0.25 and np.abs(W1).max() <= 1 / np.sqrt(8)
    with pytest.raises(ValueError):
        init_params(2, 2, "cnn")


def test_forward_tanh_hidden():
    params = init_params(3, 2, "mlp", hidden=4, rng=1)
    X = np.random.default_rng(2).normal(size=(5, 3))
    logits, acts = forward(params, X)
    (W0, b0), (W1, b1) = params.layers
    np.testing.assert_allclose(logits, np.tanh(X @ W0 + b0) @ W1 + b1, rtol=1e-14)
    assert len(acts) == 2


def test_array_round_trip():
    params = init_params(3, 2, "mlp", hidden=4, rng=1)
    back = ModelParams.from_arrays(params.to_arrays())
    assert back.architecture == "mlp"
    for (Wa, ba), (Wb, bb) in zip(params.layers, back.layers):
        np.testing.assert_array_equal(Wa, Wb)
        np.testing.assert_array_equal(ba, bb)


def test_evaluate_checks_shapes():
    params = init_params(3, 2, rng=0)
    with pytest.raises(ValueError):
        evaluate(params, Dataset(np.zeros((2, 4)), [0, 1], 2))
    with pytest.raises(ValueError):
        evaluate(params, Dataset(np.zeros((2, 3)), [0, 1], 3))
