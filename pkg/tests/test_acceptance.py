"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines, or execute the
file directly.
"""

import time

import pytest

from gdstab import bounds, cli, verify

ARCHS = ("two_layer", "three_layer")


def _report(k, ok, msg):
    print(f"{'PASS' if ok else 'FAIL'} criterion {k}: {msg}", flush=True)
    assert ok, msg


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def _summary(results):
    return "; ".join(f"{r.check_id} worst={r.worst_violation:.3g} n={r.n_checked}"
                     for r in results)


@pytest.mark.acceptance
def test_criterion_01_gradient_exactness():
    res, dt = _timed(lambda: [verify.check_gradients(a, n_configs=50, m_max=32, d_max=8,
                                                     tol=1e-5) for a in ARCHS])
    ok = all(r.passed for r in res) and all(r.n_checked >= 50 for r in res) and dt < 30
    _report(1, ok, f"{_summary(res)} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_02_hessian_exactness():
    res, dt = _timed(lambda: [verify.check_hessians(a, n_configs=20, rtol=1e-4) for a in ARCHS])
    ok = all(r.passed for r in res) and all(r.n_checked >= 20 for r in res) and dt < 120
    _report(2, ok, f"{_summary(res)} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_03_two_layer_envelopes():
    r, dt = _timed(verify.check_two_layer_envelopes, widths=(16, 64, 256),
                   cs=(0.5, 0.75, 1.0), n_samples=1000)
    ok = r.passed and r.n_checked == 1000 and dt < 300
    _report(3, ok, f"worst={r.worst_violation + 0.0:.3g} of {r.n_checked}, max lmax/rho="
                   f"{r.details['max_lmax_over_rho']:.3g} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_04_three_layer_envelopes():
    r, dt = _timed(verify.check_three_layer_envelopes, widths=(8, 16), n_samples=200)
    ok = r.passed and r.n_checked == 200 and dt < 300
    _report(4, ok, f"worst={r.worst_violation + 0.0:.3g} of {r.n_checked} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_05_trajectory_laws():
    res, dt = _timed(lambda: [verify.check_trajectory_laws(a, n_runs=20, strict=True)
                              for a in ARCHS])
    ok = all(r.passed for r in res) and dt < 300
    _report(5, ok, f"{_summary(res)} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_06_self_bounding():
    res, dt = _timed(lambda: [verify.check_self_bounding(a) for a in ARCHS])
    ok = all(r.passed for r in res)
    _report(6, ok, f"{_summary(res)} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_07_almost_coercivity():
    res, dt = _timed(lambda: [verify.check_coercivity(a, n_seeds=10) for a in ARCHS])
    widths = all(r.details["width_conditions_satisfied"] for r in res)
    ok = all(r.passed for r in res) and widths and dt < 600
    _report(7, ok, f"{_summary(res)} width conditions met={widths} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_08_uniform_stability():
    r, dt = _timed(verify.check_uniform_stability, n_seeds=10)
    cert = r.details["width_conditions_satisfied"]
    ok = r.passed and cert and dt < 900
    _report(8, ok, f"worst excess={r.worst_violation:.3g} max ratio="
                   f"{r.details['max_ratio_to_bound']:.3g} certified={cert} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_09_stability_trend():
    r, dt = _timed(verify.check_stability_trend, ns=(50, 100, 200, 400), cs=(0.5, 0.75, 1.0),
                   n_seeds=10)
    ok = r.passed and dt < 1800
    _report(9, ok, f"by n {r.details['by_n']} by c {r.details['by_c']} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_10_generalization_gap():
    r, dt = _timed(verify.check_generalization_gap, n_seeds=50, n_mc=10000)
    cert = r.details["width_conditions_satisfied"]
    ok = r.passed and cert and dt < 900
    _report(10, ok, f"max(gap - bound)={r.worst_violation:.3g} at {r.location} over "
                    f"{r.n_checked} steps certified={cert} in {dt:.1f}s")


@pytest.mark.acceptance
def test_criterion_11_region_fixtures():
    t0 = time.perf_counter()
    fixtures = [("two_layer", 0.5, 0.1, "pink_infeasible"),
                ("two_layer", 1.0, 0.75, "blue_dotted_under_sufficient"),
                ("two_layer", 0.5, 0.5, "blue_over_necessary"),
                ("three_layer", 0.6, 0.4, "pink_infeasible"),
                ("three_layer", 0.75, 0.7, "blue_dotted_under_sufficient")]
    got = [bounds.classify_region(a, c, mu).region for a, c, mu, _ in fixtures]
    grids = {a: bounds.region_grid(a, 21, 21) for a in ARCHS}
    dt = time.perf_counter() - t0
    regions = {a: {v.region for v in g} for a, g in grids.items()}
    three = {"pink_infeasible", "blue_dotted_under_sufficient", "blue_over_necessary"}
    ok = (got == [f[3] for f in fixtures] and all(len(g) == 441 for g in grids.values())
          and all(r == three for r in regions.values()) and dt < 1.0)
    _report(11, ok, f"fixtures {got} grid sizes {[len(g) for g in grids.values()]} "
                    f"in {dt * 1000:.0f}ms")


SMALL = """
[network]
m = 8
d = 3
[data]
n = 10
noise_std = 0.05
[train]
t_max = 15
[run]
seeds = [0, 1]
n_mc = 200
coercivity = true
[verify]
checks = ["gradients", "hessians", "trajectory"]
n_grad_configs = 2
n_hess_configs = 1
n_traj_runs = 2
t_max = 20
[sweep]
n = [8, 12]
c = [0.5, 1.0]
"""


@pytest.mark.acceptance
def test_criterion_12_determinism(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(SMALL)
    commands = [["verify"], ["train"], ["stability"], ["sweep"], ["region"]]
    outs = []
    for rep, workers in ((0, "1"), (1, "1"), (2, "2")):
        out = tmp_path / f"run{rep}"
        for cmd in commands:
            assert cli.main(cmd + ["--config", str(cfg), "--out-dir", str(out),
                                   "--workers", workers]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    ok = outs[0] == outs[1] == outs[2] and len(outs[0]) > 0
    _report(12, ok, f"{len(outs[0])} files byte-identical across 3 runs (workers 1, 1, 2)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
