import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gdstab import verify
from gdstab.errors import ConfigError


def test_fd_gradient_quadratic():
    w = np.array([0.3, -1.2, 2.5])
    np.testing.assert_allclose(verify.fd_gradient(lambda v: 0.5 * v @ v, w), w, rtol=1e-10)


def test_fd_gradient_second_order():
    f = lambda v: math.sin(v[0]) * math.exp(v[1])
    w = np.array([0.4, 0.2])
    exact = np.array([math.cos(0.4) * math.exp(0.2), math.sin(0.4) * math.exp(0.2)])
    e1 = np.linalg.norm(verify.fd_gradient(f, w, 1e-2) - exact)
    e2 = np.linalg.norm(verify.fd_gradient(f, w, 5e-3) - exact)
    assert 3.5 < e1 / e2 < 4.5


def test_fd_rejects_bad_input():
    with pytest.raises(ValueError):
        verify.fd_gradient(lambda v: 0.0, np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        verify.fd_gradient(lambda v: float("nan"), np.zeros(2))


def test_extreme_eigs_examples():
    assert verify.extreme_eigs(np.eye(4)) == pytest.approx((1.0, 1.0))
    assert verify.extreme_eigs(np.diag([-2.0, 0.0, 5.0])) == pytest.approx((-2.0, 5.0))
    v = np.array([1.0, 2.0, -2.0])
    lo, hi = verify.extreme_eigs(np.outer(v, v))
    assert abs(lo) < 1e-14 and hi == pytest.approx(9.0, rel=1e-14)


def test_extreme_eigs_rejects_asymmetry():
    with pytest.raises(ValueError):
        verify.extreme_eigs(np.array([[1.0, 1e-6], [0.0, 1.0]]))


@given(st.integers(1, 12), st.integers(0, 1000))
def test_extreme_eigs_bracket_rayleigh_quotients(p, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((p, p))
    H = A + A.T
    lo, hi = verify.extreme_eigs(H)
    x = rng.standard_normal(p)
    q = x @ H @ x / (x @ x)
    assert lo - 1e-12 <= q <= hi + 1e-12


def test_check_result_invariant():
    r = verify._result("x", 0.3, "", 0.5, 1)
    assert r.passed
    assert not verify._result("x", 0.6, "", 0.5, 1).passed


def test_empty_suite():
    assert verify.run_suite(verify.SuiteConfig(archs=())) == []
    assert verify.run_suite(verify.SuiteConfig(checks=())) == []


def test_suite_config_validation():
    with pytest.raises(ConfigError):
        verify.SuiteConfig(checks=("nonsense",))
    with pytest.raises(ConfigError):
        verify.SuiteConfig(eta_scale=3.0)
    with pytest.raises(ConfigError):
        verify.SuiteConfig(three_layer_c=0.5)


def test_small_suite_passes():
    cfg = verify.SuiteConfig(checks=("gradients", "hessians", "trajectory", "self_bounding"),
                             n_grad_configs=3, n_hess_configs=2, n_traj_runs=2, t_max=30)
    res = verify.run_suite(cfg)
    assert len(res) == 8
    assert all(r.passed for r in res), [r.to_dict() for r in res]


def test_oversized_step_reported_not_raised():
    r = verify.check_trajectory_laws("two_layer", n_runs=1, t_max=60, strict=False,
                                     eta_scale=100.0)
    assert not r.passed
    assert r.worst_violation > 0


def test_small_envelope_samples_pass():
    r = verify.check_two_layer_envelopes(widths=(8,), cs=(0.5, 1.0), n_samples=12, d=3, n=10,
                                         t_max=20)
    assert r.passed and r.n_checked == 12
    r3 = verify.check_three_layer_envelopes(widths=(4,), n_samples=9, d=2, n=10, t_max=20)
    assert r3.passed and r3.n_checked == 9


def test_scalar_forward_rejects_nothing_silently():
    from gdstab import model
    net = model.Network.build("two_layer", 3, 0.5, 2, "tanh")
    w = np.arange(6, dtype=float) / 10
    x = np.array([0.1, -0.3])
    ref = sum(a * math.tanh(w[2 * k] * x[0] + w[2 * k + 1] * x[1])
              for k, a in enumerate([1, -1, 1])) / math.sqrt(3)
    assert verify.scalar_forward(net, w, x) == pytest.approx(ref, rel=1e-14)


def test_stability_trend_small():
    r = verify.check_stability_trend(ns=(10, 40), cs=(0.5, 1.0), m=8, t_max=20, n_seeds=2,
                                     n_for_c=10)
    assert set(r.details["by_n"]) == {"10", "40"}
    assert r.passed == (r.worst_violation < 0)
    assert r.details["by_n"]["10"] == r.details["by_c"]["0.5"]


def test_generalization_gap_small():
    r = verify.check_generalization_gap(n_seeds=3, n_mc=200, m=32, n=10, t_max=4)
    assert r.details["steps"] == [1, 2, 3, 4]
    assert len(r.details["mean_gap"]) == 4
    assert r.passed == (r.worst_violation <= 0)
    with pytest.raises(ConfigError):
        verify.check_generalization_gap(n_seeds=1, widths=3)
