import math

import numpy as np
import pytest

from gdstab import bounds, datagen, loss, model, optimizer
from gdstab.errors import ConfigError, DivergenceError


def _problem(arch="two_layer", m=8, c=0.5, d=3, n=20, noise=0.1):
    net = model.Network.build(arch, m, c, d)
    gen = datagen.DataGenerator(datagen.GenConfig(d, 1.0, 1.0, noise, 0),
                                datagen.make_teacher(net, 1))
    S = gen.sample(n, 2)
    w0 = model.init_params(net.config, 0.1, 3)
    S = S.with_c0(loss.certify_c0(net, w0, S))
    return net, gen, S, w0


def test_max_safe_stepsize_examples():
    assert optimizer.max_safe_stepsize("two_layer", 0.5) == 1.0
    b1 = b2 = 1.0
    assert optimizer.max_safe_stepsize("three_layer", bounds.rho_hat(b1, b2)) == 1 / 96
    assert optimizer.max_safe_stepsize("two_layer", 1.0) == 0.5 * optimizer.max_safe_stepsize(
        "two_layer", 0.5)


def test_gd_step_fixed_points():
    w = np.array([1.0, -2.0])
    np.testing.assert_array_equal(optimizer.gd_step(w, np.zeros(2), 0.3), w)
    np.testing.assert_array_equal(optimizer.gd_step(w, np.ones(2), 0.0), w)


def test_gd_step_rejects_non_finite():
    with pytest.raises(DivergenceError):
        optimizer.gd_step(np.zeros(2), np.array([np.nan, 0.0]), 0.1)


def test_one_step_scalar_network():
    net = model.Network.build("two_layer", 1, 1.0, 1)
    S = loss.Dataset(np.array([[0.5]]), np.array([0.3]), 1.0, 1.0)
    w, eta = 0.2, 0.7
    s = 1 / (1 + math.exp(-w * 0.5))
    grad = (s - 0.3) * s * (1 - s) * 0.5
    traj = optimizer.gd_run(net, S, optimizer.GDConfig(eta, 1, strict=False), np.array([w]))
    assert traj.final[0] == pytest.approx(w - eta * grad, rel=1e-15)


def test_constant_trajectory_at_teacher():
    net, gen, _, _ = _problem(noise=0.0)
    S = gen.sample(20, 5)
    S = S.with_c0(loss.certify_c0(net, gen.teacher.params, S))
    traj = optimizer.gd_run(net, S, optimizer.GDConfig(0.5, 10), gen.teacher.params)
    assert np.all(traj.risks == 0.0)
    np.testing.assert_array_equal(traj.final, gen.teacher.params)


@pytest.mark.parametrize("arch,c", [("two_layer", 0.5), ("three_layer", 0.75)])
def test_monotone_descent_and_deviation(arch, c):
    net, _, S, w0 = _problem(arch, c=c)
    smooth = optimizer.smoothness_constant(net, S)
    eta = optimizer.max_safe_stepsize(arch, smooth)
    traj = optimizer.gd_run(net, S, optimizer.GDConfig(eta, 100), w0)
    L = traj.risks
    assert np.all(L[1:] <= L[:-1])
    desc = L[:-1] - eta * (1 - eta * smooth / 2) * traj.grad_norms[:-1] ** 2
    assert np.all(L[1:] <= desc * (1 + 1e-12))
    t = np.arange(101)
    assert np.all(traj.deviations <= np.sqrt(2 * eta * t * L[0]) * (1 + 1e-12))


def test_strict_mode_rejects_large_step():
    net, _, S, w0 = _problem()
    eta = 1.01 * optimizer.max_safe_stepsize("two_layer", optimizer.smoothness_constant(net, S))
    with pytest.raises(ConfigError):
        optimizer.gd_run(net, S, optimizer.GDConfig(eta, 10), w0)


def test_divergence_detected_in_strict_mode():
    net = model.Network.build("two_layer", 8, 0.5, 3, "tanh")
    gen = datagen.DataGenerator(datagen.GenConfig(3, 1.0, 1.0, 0.1, 0),
                                datagen.make_teacher(net, 1))
    S = gen.sample(20, 2).with_c0(1.0)
    w0 = model.init_params(net.config, 0.1, 3)
    # a tiny claimed smoothness lets the oversized step past the admissibility check
    with pytest.raises(DivergenceError) as info:
        optimizer.gd_run(net, S, optimizer.GDConfig(10.0, 100), w0, smoothness=1e-9)
    assert info.value.step >= optimizer.DIVERGENCE_PATIENCE


def test_snapshots_and_rows():
    net, _, S, w0 = _problem()
    traj = optimizer.gd_run(net, S, optimizer.GDConfig(1.0, 10, 3), w0)
    assert [t for t, _ in traj.snapshots] == [0, 3, 6, 9, 10]
    assert len(traj.to_rows()) == 11


def test_lockstep_runs_match_single_runs():
    net, gen, S, w0 = _problem()
    S2 = gen.sample(20, 9)
    wT, risks = optimizer.gd_run_many(net, np.stack([S.X, S2.X]), np.stack([S.y, S2.y]), w0,
                                      1.0, 15)
    single = optimizer.gd_run(net, S, optimizer.GDConfig(1.0, 15, strict=False), w0)
    np.testing.assert_allclose(wT[0], single.final, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(risks[0], single.risks, rtol=1e-13)


def test_config_validation():
    with pytest.raises(ConfigError):
        optimizer.GDConfig(0.0, 10)
    with pytest.raises(ConfigError):
        optimizer.GDConfig(0.1, 0)
    net, _, S, _ = _problem()
    with pytest.raises(ConfigError):
        optimizer.smoothness_constant(net, loss.Dataset(S.X, S.y, 1.0, 1.0))
