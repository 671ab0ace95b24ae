import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gdstab import model
from gdstab.errors import ConfigError, DimensionError
from gdstab.verify import fd_gradient, fd_jacobian, scalar_forward


def test_two_layer_all_positive_signs_at_zero():
    net = model.Network.build("two_layer", 4, 0.5, 3, signs=np.ones(4))
    assert model.forward(net, np.zeros(12), np.array([0.3, -0.2, 0.5])) == pytest.approx(1.0,
                                                                                         abs=1e-15)


def test_balanced_signs_cancel_at_zero():
    net = model.Network.build("two_layer", 4, 0.5, 3)
    assert list(net.signs) == [1.0, -1.0, 1.0, -1.0]
    assert model.forward(net, np.zeros(12), np.array([0.3, -0.2, 0.5])) == 0.0


def test_odd_width_balanced_up_to_one():
    assert model.balanced_signs(5).sum() == 1.0


def test_three_layer_matches_scalar_loop():
    net = model.Network.build("three_layer", 3, 0.75, 2)
    rng = np.random.default_rng(1)
    w = 0.3 * rng.standard_normal(net.n_params)
    x = np.array([0.4, -0.6])
    assert model.forward(net, w, x) == pytest.approx(scalar_forward(net, w, x), rel=1e-12)


@given(arch=st.sampled_from(["two_layer", "three_layer"]), m=st.integers(1, 6),
       d=st.integers(1, 4), c=st.floats(0.51, 1.0), seed=st.integers(0, 10_000),
       act=st.sampled_from(["sigmoid", "tanh"]))
def test_batched_forward_matches_scalar_loop(arch, m, d, c, seed, act):
    net = model.Network.build(arch, m, c, d, act, "random", seed)
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(net.n_params)
    X = rng.uniform(-0.5, 0.5, size=(4, d))
    f = model.forward_batch(net, w, X)
    ref = [scalar_forward(net, w, x) for x in X]
    np.testing.assert_allclose(f, ref, rtol=1e-12, atol=1e-14)


def test_gradient_zero_at_zero_input():
    net = model.Network.build("two_layer", 5, 0.6, 3)
    w = np.random.default_rng(0).standard_normal(15)
    assert np.all(model.grad_f(net, w, np.zeros(3)) == 0.0)


def test_scalar_gradient_closed_form():
    net = model.Network.build("two_layer", 1, 1.0, 1)
    assert model.grad_f(net, np.zeros(1), np.ones(1))[0] == 0.25


@pytest.mark.parametrize("arch,c", [("two_layer", 0.5), ("three_layer", 0.8)])
def test_gradient_matches_finite_differences(arch, c):
    net = model.Network.build(arch, 4, c, 3)
    rng = np.random.default_rng(2)
    w = rng.standard_normal(net.n_params)
    x = np.array([0.2, -0.5, 0.3])
    g = model.grad_f(net, w, x)
    fd = fd_gradient(lambda v: model.forward(net, v, x), w)
    assert np.linalg.norm(g - fd) / np.linalg.norm(g) < 1e-5


def test_batched_gradients_match_single():
    net = model.Network.build("three_layer", 4, 0.75, 2)
    rng = np.random.default_rng(3)
    w = rng.standard_normal(net.n_params)
    X = rng.uniform(-0.5, 0.5, size=(3, 2))
    G = model.grad_batch(net, w, X)
    for i in range(3):
        np.testing.assert_allclose(G[i], model.grad_f(net, w, X[i]), rtol=1e-13, atol=1e-16)


def test_weighted_gradient_is_weighted_sum():
    net = model.Network.build("two_layer", 6, 0.7, 3)
    rng = np.random.default_rng(4)
    w = rng.standard_normal(net.n_params)
    X = rng.uniform(-0.5, 0.5, size=(5, 3))
    r = rng.standard_normal(5)
    _, g = model.forward_and_weighted_grad(net, w, X, lambda f: r)
    np.testing.assert_allclose(g, r @ model.grad_batch(net, w, X), rtol=1e-12, atol=1e-15)


def test_hessian_zero_at_origin_for_sigmoid():
    net = model.Network.build("two_layer", 3, 0.5, 2)
    assert np.all(model.hessian_f(net, np.zeros(6), np.array([0.5, 0.1])) == 0.0)


def test_three_layer_hessian_matches_fd_of_gradient():
    net = model.Network.build("three_layer", 3, 0.75, 2)
    rng = np.random.default_rng(5)
    w = rng.standard_normal(net.n_params)
    x = np.array([0.3, -0.4])
    H = model.hessian_f(net, w, x)
    J = fd_jacobian(lambda v: model.grad_f(net, v, x), w)
    assert np.max(np.abs(H - J)) < 1e-4 * (1 + np.linalg.norm(H, 2))
    assert np.array_equal(H, H.T)


def test_flattening_order():
    cfg = model.NetworkConfig("three_layer", 2, 0.75, 3)
    w = np.arange(cfg.n_params, dtype=float)
    W1, W2 = model.split_params(cfg, w)
    assert W1[1, 0] == 3.0 and W2[0, 1] == 7.0
    np.testing.assert_array_equal(model.join_params(W1, W2), w)


def test_parameter_count():
    assert model.NetworkConfig("two_layer", 7, 0.5, 3).n_params == 21
    assert model.NetworkConfig("three_layer", 7, 0.6, 3).n_params == 70


@pytest.mark.parametrize("arch,c", [("two_layer", 0.49), ("two_layer", 1.01),
                                    ("three_layer", 0.5), ("three_layer", 1.2)])
def test_scaling_range_enforced(arch, c):
    with pytest.raises(ConfigError):
        model.NetworkConfig(arch, 4, c, 2)


def test_dimension_checks():
    net = model.Network.build("two_layer", 3, 0.5, 2)
    with pytest.raises(DimensionError):
        model.forward(net, np.zeros(5), np.zeros(2))
    with pytest.raises(DimensionError):
        model.forward(net, np.zeros(6), np.zeros(3))
    with pytest.raises(ConfigError):
        model.Network.build("two_layer", 3, 0.5, 2, signs=np.array([1.0, 0.5, -1.0]))


def test_hessian_dimension_cap():
    net = model.Network.build("three_layer", 50, 0.75, 2)
    with pytest.raises(ConfigError):
        model.hessian_f(net, np.zeros(net.n_params), np.zeros(2), cap=1000)


def test_signs_are_read_only():
    net = model.Network.build("two_layer", 4, 0.5, 2)
    with pytest.raises(ValueError):
        net.signs[0] = 5.0


def test_init_params_seeded():
    cfg = model.NetworkConfig("two_layer", 8, 0.5, 3)
    np.testing.assert_array_equal(model.init_params(cfg, 0.1, 3), model.init_params(cfg, 0.1, 3))
    assert np.all(model.init_params(cfg, 0.0, 3) == 0.0)
