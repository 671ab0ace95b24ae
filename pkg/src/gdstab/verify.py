"""Independent numerical oracles and the invariant suite.

Oracles here only call forward evaluations (finite differences) or a generic
dense eigensolver, never the closed-form derivative they are checking.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds, datagen, loss, model, optimizer, stability
from .datagen import derive_seed
from .errors import ConfigError, DivergenceError

# slack for eigenvalue and inequality checks that hold exactly in real arithmetic
EIG_RTOL = 1e-12


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    worst_violation: float
    location: str
    tolerance: float
    n_checked: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _result(check_id, worst, location, tol, count, **details):
    worst = float(worst)
    return CheckResult(check_id, bool(worst <= tol), worst, location, float(tol), int(count), details)


# ----------------------------------------------------------------------------
# oracles

def fd_gradient(fun, params, step=1e-5) -> np.ndarray:
    """Central differences of a scalar field, one coordinate at a time."""
    if step <= 0:
        raise ValueError("step must be positive")
    w = np.array(params, dtype=float)
    g = np.empty_like(w)
    for j in range(w.size):
        old = w[j]
        w[j] = old + step
        fp = fun(w)
        w[j] = old - step
        fm = fun(w)
        w[j] = old
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ValueError(f"non-finite evaluation at coordinate {j}")
        g[j] = (fp - fm) / (2 * step)
    return g


def fd_jacobian(vec_fun, params, step=1e-5) -> np.ndarray:
    """Central-difference Jacobian of a vector field; column j is d/dw_j."""
    if step <= 0:
        raise ValueError("step must be positive")
    w = np.array(params, dtype=float)
    cols = []
    for j in range(w.size):
        old = w[j]
        w[j] = old + step
        gp = np.array(vec_fun(w), dtype=float)
        w[j] = old - step
        gm = np.array(vec_fun(w), dtype=float)
        w[j] = old
        if not (np.all(np.isfinite(gp)) and np.all(np.isfinite(gm))):
            raise ValueError(f"non-finite evaluation at coordinate {j}")
        cols.append((gp - gm) / (2 * step))
    return np.column_stack(cols)


def extreme_eigs(H, sym_tol=1e-10):
    """(lambda_min, lambda_max) of a dense symmetric matrix."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(H - H.T), initial=0.0) > sym_tol * max(1.0, np.max(np.abs(H), initial=0.0)):
        raise ValueError("matrix is not symmetric within tolerance")
    ev = np.linalg.eigvalsh(H)
    return float(ev[0]), float(ev[-1])


def scalar_forward(net, w, x) -> float:
    """Loop-based forward pass used as an independent re-implementation."""
    cfg = net.config
    m, d, c = cfg.m, cfg.d, cfg.c
    sig = {"sigmoid": lambda t: 1.0 / (1.0 + math.exp(-t)), "tanh": math.tanh}[net.act.kind]
    w = [float(v) for v in w]
    x = [float(v) for v in x]
    a = [float(v) for v in net.signs]

    def row(k):
        return sum(w[k * d + j] * x[j] for j in range(d))

    if cfg.arch == "two_layer":
        return sum(a[k] * sig(row(k)) for k in range(m)) / m ** c
    inner = [sig(row(s)) for s in range(m)]
    off = m * d
    out = 0.0
    for i in range(m):
        h = sum(w[off + i * m + s] * inner[s] for s in range(m)) / m ** c
        out += a[i] * sig(h)
    return out / m ** c


# ----------------------------------------------------------------------------
# shared setup

@dataclass(frozen=True)
class Setup:
    net: model.Network
    gen: datagen.DataGenerator
    S: loss.Dataset
    S_prime: loss.Dataset
    w0: np.ndarray
    smooth: float
    eta: float


def make_setup(arch, m, c, d, n, seed, activation="sigmoid", init_std=0.1, teacher_std=1.0,
               noise_std=0.0, eta_scale=1.0, c_x=1.0, c_y=1.0, teacher_mu=None) -> Setup:
    """Teacher-labelled S and S', W0, c0 certified over both, and step eta_scale * admissible."""
    net = model.Network.build(arch, m, c, d, activation)
    teacher = datagen.make_teacher(net, derive_seed(seed, 11), teacher_std, teacher_mu)
    gen = datagen.DataGenerator(datagen.GenConfig(d, c_x, c_y, noise_std, seed), teacher)
    S = gen.sample(n, derive_seed(seed, 1))
    S_prime = gen.sample(n, derive_seed(seed, 2))
    w0 = model.init_params(net.config, init_std, derive_seed(seed, 3))
    c0 = loss.certify_c0(net, w0, S, S_prime)
    S, S_prime = S.with_c0(c0), S_prime.with_c0(c0)
    smooth = optimizer.smoothness_constant(net, S)
    eta = eta_scale * optimizer.max_safe_stepsize(arch, smooth)
    return Setup(net, gen, S, S_prime, w0, smooth, eta)


# configurations satisfying every width condition of their architecture
CERTIFIED = {
    "two_layer": dict(m=256, c=0.5, d=5, n=50, t_max=10, init_std=0.1, teacher_mu=0.5,
                      noise_std=0.05, eta_scale=1.0),
    "three_layer": dict(m=32, c=0.75, d=3, n=50, t_max=10, init_std=0.1, teacher_mu=0.75,
                        noise_std=0.05, eta_scale=0.25),
}


def _random_net(rng, arch, m_max, d_max):
    m = int(rng.integers(1, m_max + 1))
    d = int(rng.integers(1, d_max + 1))
    if arch == "two_layer":
        c = float(rng.uniform(0.5, 1.0))
    else:
        c = float(rng.uniform(0.5 + 1e-6, 1.0))
    act = "sigmoid" if rng.random() < 0.5 else "tanh"
    signs = "random" if rng.random() < 0.5 else "balanced"
    return model.Network.build(arch, m, c, d, act, signs, int(rng.integers(1 << 30)))


# ----------------------------------------------------------------------------
# checks

def check_gradients(arch, n_configs=50, seed=0, m_max=32, d_max=8, step=1e-5, tol=1e-5):
    """grad f and grad l against central differences of the forward pass."""
    rng = np.random.default_rng(seed)
    worst, where = 0.0, ""
    for k in range(n_configs):
        net = _random_net(rng, arch, m_max, d_max)
        d = net.config.d
        x = datagen.sample_ball(rng, 1, d, 1.0)[0]
        w = rng.normal(scale=rng.uniform(0.2, 1.0), size=net.n_params)
        y = float(rng.uniform(-1, 1))
        z = loss.Example(x, y)
        pairs = [(model.grad_f(net, w, x), fd_gradient(lambda v: model.forward(net, v, x), w, step)),
                 (loss.loss_grad(net, w, z),
                  fd_gradient(lambda v: 0.5 * (model.forward(net, v, x) - y) ** 2, w, step))]
        for g, fd in pairs:
            err = np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.linalg.norm(fd), 1e-300)
            if err > worst:
                worst, where = err, f"config {k}: m={net.config.m} d={d} c={net.config.c:.3f}"
    return _result(f"gradient_fd[{arch}]", worst, where, tol, n_configs)


def check_hessians(arch, n_configs=20, seed=0, m_max=12, d_max=6, step=1e-5, rtol=1e-4):
    """Assembled loss Hessian against finite differences of the loss gradient."""
    rng = np.random.default_rng(seed)
    worst, where = 0.0, ""
    for k in range(n_configs):
        net = _random_net(rng, arch, m_max, d_max)
        d = net.config.d
        x = datagen.sample_ball(rng, 1, d, 1.0)[0]
        w = rng.normal(scale=rng.uniform(0.2, 1.0), size=net.n_params)
        z = loss.Example(x, float(rng.uniform(-1, 1)))
        H = loss.loss_hessian(net, w, z)
        J = fd_jacobian(lambda v: loss.loss_grad(net, v, z), w, step)
        # ratio of the deviation to its allowance 1e-4 (1 + ||H||)
        ratio = np.max(np.abs(H - J)) / (rtol * (1 + np.linalg.norm(H, 2)))
        if ratio > worst:
            worst, where = ratio, f"config {k}: m={net.config.m} d={d} c={net.config.c:.3f}"
    return _result(f"hessian_fd[{arch}]", worst, where, 1.0, n_configs)


def _ball_samples(rng, w0, radius, count):
    P = w0.size
    g = rng.standard_normal((count, P))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / P)
    return w0 + g * r[:, None]


def sample_trajectory_ball(setup: Setup, t_max, count, rng):
    """W sampled near W0, on the GD trajectory, and uniformly in the deviation ball."""
    stride = max(1, t_max // max(1, count // 3))
    traj = optimizer.gd_run(setup.net, setup.S, optimizer.GDConfig(setup.eta, t_max, stride),
                            setup.w0, setup.smooth)
    radius = math.sqrt(2 * setup.eta * t_max * setup.S.c0)
    k1 = count // 3
    k2 = min(count // 3, len(traj.snapshots))
    k3 = count - k1 - k2
    near = _ball_samples(rng, setup.w0, 1e-3, k1)
    path_idx = np.linspace(0, len(traj.snapshots) - 1, k2).round().astype(int)
    path = np.array([traj.snapshots[i][1] for i in path_idx]).reshape(k2, -1)
    ball = _ball_samples(rng, setup.w0, radius, k3)
    return np.concatenate([near, path, ball]), traj


def check_two_layer_envelopes(widths=(16, 64, 256), cs=(0.5, 0.75, 1.0), n_samples=1000, d=5,
                              n=50, t_max=200, seed=0, activation="sigmoid"):
    """lambda_max(Hess l) <= rho and lambda_min >= the curvature lower bound."""
    combos = [(m, c) for m in widths for c in cs]
    per = [n_samples // len(combos) + (1 if i < n_samples % len(combos) else 0)
           for i in range(len(combos))]
    rng = np.random.default_rng(seed)
    worst, where, count = -math.inf, "", 0
    worst_ratio_max, worst_ratio_min = 0.0, 0.0
    for (m, c), k in zip(combos, per):
        st = make_setup("two_layer", m, c, d, n, derive_seed(seed, m, int(c * 1000)), activation)
        Ws, _ = sample_trajectory_ball(st, t_max, k, rng)
        act, S = st.net.act, st.S
        for j, w in enumerate(Ws):
            z = S.examples[j % S.n]
            H = loss.loss_hessian(st.net, w, z)
            lmin, lmax = extreme_eigs(H)
            dist = float(np.linalg.norm(w - st.w0))
            lb = bounds.curvature_lower_bound_two_layer(S.c_x, act, m, c, dist, S.c0)
            tol = EIG_RTOL * (1 + max(-lmin, lmax))
            for v, lab in ((lmax - st.smooth, "lambda_max"), (lb - lmin, "lambda_min")):
                if v - tol > worst:
                    worst, where = v - tol, f"m={m} c={c} sample {j}: {lab}"
            worst_ratio_max = max(worst_ratio_max, lmax / st.smooth)
            worst_ratio_min = max(worst_ratio_min, lmin / lb if lb < 0 else 0.0)
            count += 1
    return _result("eigen_envelope[two_layer]", worst, where, 0.0, count,
                   max_lmax_over_rho=worst_ratio_max, max_lmin_over_bound=worst_ratio_min)


def check_three_layer_envelopes(widths=(8, 16), c=0.75, n_samples=200, d=4, n=30, t_max=100,
                                seed=0, activation="sigmoid"):
    """lambda_max(Hess l) <= rho_W, lambda_min >= -C_W(...), ||Hess f|| <= C_W, ||grad f||^2 bound."""
    rng = np.random.default_rng(seed)
    worst, where, count = -math.inf, "", 0
    per = [n_samples // len(widths) + (1 if i < n_samples % len(widths) else 0)
           for i in range(len(widths))]
    for m, k in zip(widths, per):
        st = make_setup("three_layer", m, c, d, n, derive_seed(seed, m), activation)
        Ws, _ = sample_trajectory_ball(st, t_max, k, rng)
        act, S = st.net.act, st.S
        for j, w in enumerate(Ws):
            z = S.examples[j % S.n]
            w2n = float(np.linalg.norm(model.split_params(st.net.config, w)[1]))
            Hf = model.hessian_f(st.net, w, z.x)
            gf = model.grad_f(st.net, w, z.x)
            H = np.outer(gf, gf) + (model.forward(st.net, w, z.x) - z.y) * Hf
            H = 0.5 * (H + H.T)
            lmin, lmax = extreme_eigs(H)
            hf_norm = float(np.linalg.norm(Hf, 2))
            cw = bounds.c_w_three_layer(w2n, m, c, S.c_x, act)
            rw = bounds.rho_w_three_layer(w2n, m, c, S.c_x, act, S.c0)
            lb = bounds.curvature_lower_bound_three_layer(w2n, m, c, S.c_x, act, S.c0)
            gb = bounds.grad_sq_bound_three_layer(w2n, m, c, S.c_x, act)
            tol = EIG_RTOL * (1 + max(-lmin, lmax))
            for v, lab in ((lmax - rw, "lambda_max"), (lb - lmin, "lambda_min"),
                           (hf_norm - cw, "hess_f_norm"), (float(gf @ gf) - gb, "grad_sq")):
                if v - tol > worst:
                    worst, where = v - tol, f"m={m} sample {j}: {lab}"
            count += 1
    return _result("eigen_envelope[three_layer]", worst, where, 0.0, count)


def check_two_layer_function_envelopes(widths=(16, 64), cs=(0.5, 0.75, 1.0), n_samples=1000, d=5,
                                       seed=0):
    """||grad f||^2 bound, ||Hess f||_op bound and the Lipschitz bound on random (W, x)."""
    rng = np.random.default_rng(seed)
    worst, where, count = -math.inf, "", 0
    combos = [(m, c) for m in widths for c in cs]
    for j in range(n_samples):
        m, c = combos[j % len(combos)]
        net = model.Network.build("two_layer", m, c, d, "sigmoid" if j % 2 else "tanh")
        x = datagen.sample_ball(rng, 1, d, 1.0)[0]
        w = rng.normal(scale=rng.uniform(0.1, 2.0), size=net.n_params)
        w2 = w + rng.normal(scale=0.5, size=net.n_params)
        act = net.act
        gf = model.grad_f(net, w, x)
        hf = model.hessian_f(net, w, x)
        vals = [
            (float(gf @ gf) - bounds.grad_sq_bound_two_layer(1.0, act, m, c), "grad_sq"),
            (float(np.linalg.norm(hf, 2)) - bounds.hessian_f_bound_two_layer(1.0, act, m, c),
             "hess_f_norm"),
            (abs(model.forward(net, w, x) - model.forward(net, w2, x))
             - bounds.lipschitz_two_layer(1.0, act, m, c) * float(np.linalg.norm(w - w2)),
             "lipschitz"),
        ]
        for v, lab in vals:
            v -= EIG_RTOL * (1 + abs(v))
            if v > worst:
                worst, where = v, f"sample {j} m={m} c={c}: {lab}"
        count += 1
    return _result("function_envelope[two_layer]", worst, where, 0.0, count)


def check_trajectory_laws(arch, n_runs=20, m=None, c=None, d=5, n=50, t_max=200, seed=0,
                          strict=True, eta_scale=1.0, activation="sigmoid"):
    """Monotone risk, descent inequality, deviation bounds along strict-mode runs."""
    if m is None:
        m = 64 if arch == "two_layer" else 8
    if c is None:
        c = 0.5 if arch == "two_layer" else 0.75
    worst, where = -math.inf, ""
    counts = {"monotone": 0, "descent": 0, "deviation": 0, "refined": 0, "crude": 0}
    for r in range(n_runs):
        st = make_setup(arch, m, c, d, n, derive_seed(seed, r), activation, eta_scale=eta_scale)
        try:
            traj = optimizer.gd_run(st.net, st.S, optimizer.GDConfig(st.eta, t_max, 0, strict),
                                    st.w0, st.smooth)
        except DivergenceError as exc:
            return _result(f"trajectory_laws[{arch}]", math.inf, f"run {r}: {exc}", 0.0, r,
                           diverged=True)
        L, dev, gn = traj.risks, traj.deviations, traj.grad_norms
        eta, rho = st.eta, st.smooth
        t = np.arange(t_max + 1)
        scale = EIG_RTOL * (1 + np.abs(L[:-1]))
        mono = L[1:] - L[:-1] - scale
        desc = L[1:] - (L[:-1] - eta * (1 - eta * rho / 2) * gn[:-1] ** 2) - scale
        devb = dev - np.sqrt(2 * eta * t * L[0]) - EIG_RTOL * (1 + dev)
        checks = [("monotone", mono), ("descent", desc), ("deviation", devb)]
        if arch == "three_layer":
            checks.append(("refined", dev - np.sqrt(2 * st.S.c0 * eta * t) - EIG_RTOL * (1 + dev)))
            checks.append(("crude", dev - eta * t * m ** (2 * c - 1) - EIG_RTOL * (1 + dev)))
        for lab, arr in checks:
            counts[lab] += arr.size
            k = int(np.argmax(arr))
            if arr[k] > worst:
                worst, where = float(arr[k]), f"run {r} step {k}: {lab}"
    return _result(f"trajectory_laws[{arch}]", worst, where, 0.0, n_runs, counts=counts)


def check_self_bounding(arch, n_runs=5, m=None, c=None, d=5, n=50, t_max=200, n_points=1000,
                        seed=0, activation="sigmoid"):
    """||grad l||^2 <= 2 rho l (rho_hat for three layers) on trajectory points."""
    if m is None:
        m = 64 if arch == "two_layer" else 8
    if c is None:
        c = 0.5 if arch == "two_layer" else 0.75
    per_run = max(1, n_points // (n_runs * n))
    stride = max(1, t_max // per_run)
    worst, where, count = -math.inf, "", 0
    for r in range(n_runs):
        st = make_setup(arch, m, c, d, n, derive_seed(seed, 100 + r), activation)
        traj = optimizer.gd_run(st.net, st.S, optimizer.GDConfig(st.eta, t_max, stride),
                                st.w0, st.smooth)
        for t, w in traj.snapshots:
            G = model.grad_batch(st.net, w, st.S.X)
            res = model.forward_batch(st.net, w, st.S.X) - st.S.y
            gl2 = res ** 2 * np.einsum("np,np->n", G, G)
            ell = 0.5 * res ** 2
            v = gl2 - 2 * st.smooth * ell - EIG_RTOL * (1 + gl2)
            k = int(np.argmax(v))
            count += v.size
            if v[k] > worst:
                worst, where = float(v[k]), f"run {r} step {t} example {k}"
    return _result(f"self_bounding[{arch}]", worst, where, 0.0, count)


def _certified(arch, overrides):
    cfg = dict(CERTIFIED[arch])
    unknown = set(overrides) - set(cfg) - {"activation"}
    if unknown:
        raise ConfigError(f"unknown overrides {sorted(unknown)}")
    cfg.update(overrides)
    return cfg


def _paired(arch, seed, cfg, check):
    t_max = cfg.pop("t_max")
    st = make_setup(arch, seed=seed, **cfg)
    rep = stability.paired_stability_run(st.net, st.S, st.S_prime,
                                         optimizer.GDConfig(st.eta, t_max), st.w0,
                                         wstar=st.gen.teacher.params, check_coercivity=check)
    return st, rep


def check_coercivity(arch, n_seeds=10, seed=0, **overrides):
    """Almost co-coercivity at every step of every pair (S, S^(i))."""
    total, viol, worst, where = 0, 0, math.inf, ""
    certified = True
    for s in range(n_seeds):
        _, rep = _paired(arch, derive_seed(seed, 200 + s), _certified(arch, overrides), True)
        certified &= rep.certified
        total += rep.coercivity.checks
        viol += rep.coercivity.violations
        if rep.coercivity.worst_margin < worst:
            worst = rep.coercivity.worst_margin
            where = f"seed {s} step {rep.coercivity.worst_step} index {rep.coercivity.worst_index}"
    return _result(f"coercivity[{arch}]", viol, where, 0.0, total, worst_relative_margin=worst,
                   width_conditions_satisfied=bool(certified))


def check_uniform_stability(n_seeds=10, seed=0, **overrides):
    """Per-index final distance against the uniform stability bound (two layers)."""
    worst, where, count = -math.inf, "", 0
    certified = True
    ratio = 0.0
    for s in range(n_seeds):
        _, rep = _paired("two_layer", derive_seed(seed, 300 + s),
                         _certified("two_layer", overrides), False)
        certified &= rep.certified
        v = rep.per_index_distance - rep.theoretical_uniform
        k = int(np.argmax(v))
        count += v.size
        ratio = max(ratio, rep.uniform_max / rep.theoretical_uniform)
        if v[k] > worst:
            worst, where = float(v[k]), f"seed {s} index {k}"
    return _result("uniform_stability[two_layer]", worst, where, 0.0, count,
                   width_conditions_satisfied=bool(certified), max_ratio_to_bound=ratio)


def _trend_point(m, c, n, t_max, eta, seeds, seed, d, noise_std, teacher_mu, activation):
    net = model.Network.build("two_layer", m, c, d, activation)
    teacher = datagen.make_teacher(net, derive_seed(seed, 11), 1.0, teacher_mu)
    gen = datagen.DataGenerator(datagen.GenConfig(d, 1.0, 1.0, noise_std, seed), teacher)
    gd = optimizer.GDConfig(eta, t_max)
    vals = [stability.stability_experiment(net, gen, n, gd, derive_seed(seed, 400 + s),
                                           n_mc=100).on_average_sq for s in range(seeds)]
    return float(np.mean(vals))


def check_stability_trend(ns=(50, 100, 200, 400), cs=(0.5, 0.75, 1.0), m=64, t_max=100,
                          n_seeds=10, seed=7, d=5, noise_std=0.1, teacher_mu=0.5,
                          activation="sigmoid", n_for_c=100):
    """Seed-averaged on-average stability must fall strictly as n grows and as c grows.

    One step size, admissible at the smallest c, is shared by every point so the
    comparison across c isolates the scaling.
    """
    act = model.Network.build("two_layer", m, min(cs), d, activation).act
    eta = 1.0 / (2.0 * bounds.rho_two_layer(1.0, 1.0, act, m, min(cs)))
    args = (t_max, eta, n_seeds, seed, d, noise_std, teacher_mu, activation)
    by_n = [_trend_point(m, min(cs), n, *args) for n in ns]
    by_c = [_trend_point(m, c, n_for_c, *args) for c in cs]
    worst, where = -math.inf, ""
    for label, vals, keys in (("n", by_n, ns), ("c", by_c, cs)):
        for k in range(len(vals) - 1):
            step = vals[k + 1] - vals[k]
            if step > worst:
                worst, where = step, f"{label}: {keys[k]} -> {keys[k + 1]}"
    # strict decrease: every consecutive difference must be negative
    return CheckResult("stability_trend[two_layer]", bool(worst < 0), float(worst), where, 0.0,
                       len(by_n) + len(by_c),
                       {"eta": eta, "by_n": dict(zip(map(str, ns), by_n)),
                        "by_c": dict(zip(map(str, cs), by_c))})


def check_generalization_gap(n_seeds=50, seed=7, n_mc=10000, **overrides):
    """Seed-averaged L(W_t) - L_S(W_t) against the generalization bound at every t >= 1."""
    cfg = _certified("two_layer", overrides)
    net = model.Network.build("two_layer", cfg["m"], cfg["c"], cfg["d"],
                              cfg.get("activation", "sigmoid"))
    teacher = datagen.make_teacher(net, derive_seed(seed, 11), 1.0, cfg["teacher_mu"])
    gen = datagen.DataGenerator(datagen.GenConfig(cfg["d"], 1.0, 1.0, cfg["noise_std"], seed),
                                teacher)
    act = net.act
    eta = cfg["eta_scale"] / (2.0 * bounds.rho_two_layer(1.0, 1.0, act, cfg["m"], cfg["c"]))
    recs = stability.excess_risk_experiment(
        net, gen, cfg["n"], optimizer.GDConfig(eta, cfg["t_max"]),
        [derive_seed(seed, 500 + s) for s in range(n_seeds)], cfg["init_std"], n_mc, 1)
    gaps = np.mean([r["gap"] for r in recs], axis=0)
    bound = np.mean([r["gen_bound"] for r in recs], axis=0)
    se = np.std([r["gap"] for r in recs], axis=0, ddof=1) / math.sqrt(n_seeds)
    v = gaps - bound
    k = int(np.argmax(v))
    return _result("generalization_gap[two_layer]", v[k], f"t={recs[0]['steps'][k]}", 0.0,
                   len(v), width_conditions_satisfied=all(r["certified"] for r in recs),
                   steps=recs[0]["steps"], mean_gap=gaps.tolist(), gap_se=se.tolist(),
                   mean_bound=bound.tolist(), eta=eta)


# ----------------------------------------------------------------------------
# suite

SUITE_CHECKS = ("gradients", "hessians", "envelopes", "function_envelopes", "trajectory",
                "self_bounding", "coercivity", "uniform_stability")


@dataclass(frozen=True)
class SuiteConfig:
    archs: tuple = ("two_layer", "three_layer")
    checks: tuple = SUITE_CHECKS
    two_layer_widths: tuple = (16, 64, 256)
    two_layer_cs: tuple = (0.5, 0.75, 1.0)
    three_layer_widths: tuple = (8, 16)
    three_layer_c: float = 0.75
    d: int = 5
    n: int = 50
    t_max: int = 200
    seed: int = 0
    activation: str = "sigmoid"
    n_grad_configs: int = 50
    n_hess_configs: int = 20
    n_eig_samples: int = 1000
    n_eig_samples_three: int = 200
    n_traj_runs: int = 20
    n_pair_seeds: int = 10
    strict: bool = True
    eta_scale: float = 1.0

    def __post_init__(self):
        bad = set(self.checks) - set(SUITE_CHECKS)
        if bad:
            raise ConfigError(f"unknown checks {sorted(bad)}")
        if self.eta_scale > 1.0 and self.strict:
            raise ConfigError("eta_scale > 1 requires strict mode off")
        if not 0.5 < self.three_layer_c <= 1.0:
            raise ConfigError("three-layer scaling must lie in (1/2, 1]")
        if any(not 0.5 <= c <= 1.0 for c in self.two_layer_cs):
            raise ConfigError("two-layer scaling must lie in [1/2, 1]")
        if any(int(m) < 1 for m in tuple(self.two_layer_widths) + tuple(self.three_layer_widths)):
            raise ConfigError("widths must be positive")
        if min(self.d, self.n, self.t_max) < 1 or self.eta_scale <= 0:
            raise ConfigError("d, n, t_max and eta_scale must be positive")


def suite_tasks(cfg: SuiteConfig):
    """Independent (check name, kwargs) tasks in reporting order."""
    tasks = []
    for arch in cfg.archs:
        if "gradients" in cfg.checks:
            tasks.append(("check_gradients", dict(arch=arch, n_configs=cfg.n_grad_configs,
                                                  seed=cfg.seed)))
        if "hessians" in cfg.checks:
            tasks.append(("check_hessians", dict(arch=arch, n_configs=cfg.n_hess_configs,
                                                 seed=cfg.seed)))
        if "envelopes" in cfg.checks:
            if arch == "two_layer":
                tasks.append(("check_two_layer_envelopes", dict(
                    widths=tuple(cfg.two_layer_widths), cs=tuple(cfg.two_layer_cs),
                    n_samples=cfg.n_eig_samples, d=cfg.d, n=cfg.n, t_max=cfg.t_max, seed=cfg.seed,
                    activation=cfg.activation)))
            else:
                tasks.append(("check_three_layer_envelopes", dict(
                    widths=tuple(cfg.three_layer_widths), c=cfg.three_layer_c,
                    n_samples=cfg.n_eig_samples_three, d=min(cfg.d, 4), n=cfg.n, t_max=cfg.t_max,
                    seed=cfg.seed, activation=cfg.activation)))
        if "function_envelopes" in cfg.checks and arch == "two_layer":
            tasks.append(("check_two_layer_function_envelopes", dict(d=cfg.d, seed=cfg.seed)))
        if "trajectory" in cfg.checks:
            tasks.append(("check_trajectory_laws", dict(
                arch=arch, n_runs=cfg.n_traj_runs, d=cfg.d, n=cfg.n, t_max=cfg.t_max,
                seed=cfg.seed, strict=cfg.strict, eta_scale=cfg.eta_scale,
                activation=cfg.activation)))
        if "self_bounding" in cfg.checks:
            tasks.append(("check_self_bounding", dict(arch=arch, d=cfg.d, n=cfg.n, t_max=cfg.t_max,
                                                      seed=cfg.seed, activation=cfg.activation)))
        if "coercivity" in cfg.checks:
            tasks.append(("check_coercivity", dict(arch=arch, n_seeds=cfg.n_pair_seeds,
                                                   seed=cfg.seed, activation=cfg.activation)))
        if "uniform_stability" in cfg.checks and arch == "two_layer":
            tasks.append(("check_uniform_stability", dict(n_seeds=cfg.n_pair_seeds, seed=cfg.seed,
                                                          activation=cfg.activation)))
    return tasks


def run_task(task) -> CheckResult:
    name, kwargs = task
    return globals()[name](**kwargs)


def run_suite(cfg: SuiteConfig, executor=None):
    """Run every enabled check; failures are returned as data.

    With an executor the checks run concurrently; results keep task order.
    """
    tasks = suite_tasks(cfg)
    if executor is None:
        return [run_task(t) for t in tasks]
    return list(executor.map(run_task, tasks))
