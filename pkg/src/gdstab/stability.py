"""Paired GD runs on a dataset and its single-replacement neighbours.

Measures on-average and uniform argument stability, checks almost
co-coercivity along the paired trajectories, and compares the empirical
generalization gap with the stability-based bounds.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds, loss, model, optimizer
from .datagen import derive_seed
from .errors import ConfigError
from .loss import Dataset, Example

# rounding allowance for inequality checks that are exact in real arithmetic
ROUNDING_RTOL = 1e-12


def perturb(S: Dataset, i: int, z_prime: Example) -> Dataset:
    """S with its i-th example replaced by z_prime."""
    if not (0 <= i < S.n):
        raise IndexError(f"index {i} out of range for n={S.n}")
    x = np.asarray(z_prime.x, dtype=float)
    if x.shape != (S.d,):
        raise ConfigError("replacement input has the wrong dimension")
    if np.linalg.norm(x) > S.c_x or abs(z_prime.y) > S.c_y:
        raise ConfigError("replacement example violates the dataset envelopes")
    X = S.X.copy()
    y = S.y.copy()
    X[i] = x
    y[i] = z_prime.y
    return Dataset(X, y, S.c_x, S.c_y, S.c0, S.n_clipped)


def neighbour_stack(S: Dataset, S_prime: Dataset):
    """Inputs/labels for S followed by its n neighbours: shapes (n+1, n, d), (n+1, n)."""
    n = S.n
    X = np.broadcast_to(S.X, (n + 1, n, S.d)).copy()
    y = np.broadcast_to(S.y, (n + 1, n)).copy()
    idx = np.arange(n)
    X[idx + 1, idx] = S_prime.X
    y[idx + 1, idx] = S_prime.y
    return X, y


@dataclass
class CoercivityRecord:
    checks: int = 0
    violations: int = 0
    worst_margin: float = math.inf   # min over checks of (lhs - rhs) / scale
    worst_step: int = -1
    worst_index: int = -1

    def to_dict(self):
        return {"checks": self.checks, "violations": self.violations,
                "worst_margin": self.worst_margin, "worst_step": self.worst_step,
                "worst_index": self.worst_index}


@dataclass
class StabilityReport:
    per_index_distance: np.ndarray
    on_average_sq: float
    uniform_max: float
    theoretical_uniform: float
    theoretical_gen_gap: float
    empirical_gen_gap: float
    width_reports: list
    certified: bool
    train_risk: float
    test_risk: float
    test_risk_se: float
    smoothness: float
    c0: float
    eta: float
    t_max: int
    n: int
    coercivity: CoercivityRecord | None = None
    per_step_distance: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "per_index_distance": [float(v) for v in self.per_index_distance],
            "on_average_sq": self.on_average_sq, "uniform_max": self.uniform_max,
            "theoretical_uniform": self.theoretical_uniform,
            "theoretical_gen_gap": self.theoretical_gen_gap,
            "empirical_gen_gap": self.empirical_gen_gap,
            "width_reports": [r.to_dict() for r in self.width_reports],
            "certified": self.certified, "train_risk": self.train_risk,
            "test_risk": self.test_risk, "test_risk_se": self.test_risk_se,
            "smoothness": self.smoothness, "c0": self.c0, "eta": self.eta,
            "t_max": self.t_max, "n": self.n,
        }
        if self.coercivity is not None:
            d["coercivity"] = self.coercivity.to_dict()
        d.update(self.extras)
        return d


def _coercivity_callback(net, S, S_prime, eta, t_max, smoothness, w0, record, per_step):
    """Per-step almost co-coercivity check for every pair (W_t, W_t^(i))."""
    cfg = net.config
    n = S.n
    act = net.act
    w0_norm = float(np.linalg.norm(w0))
    if cfg.arch == "two_layer":
        coef = 2 * eta * (1 - eta * smoothness / 2)
    else:
        coef = 2 * eta * (1 - 4 * eta * smoothness)
    # L_{S\i} drops example i; both members of a pair use identical masked sums
    # so that equal iterates give bitwise equal gradients
    Xs = np.broadcast_to(S.X, (n, n, S.d))
    ys = np.broadcast_to(S.y, (n, n))
    keep = 1.0 - np.eye(n)

    def masked_grad(w):
        def weights(f):
            return (f - ys) * keep / n
        # memory layout changes einsum summation order, so fix it
        w = np.ascontiguousarray(w)
        return model.forward_and_weighted_grad(net, w, Xs, weights)[1]

    def callback(t, w, g):
        base, nb = w[0], w[1:]
        dist = np.linalg.norm(nb - base, axis=1)
        if per_step is not None:
            per_step[:, t] = dist
        g_base = masked_grad(np.broadcast_to(base, nb.shape))
        g_nb = masked_grad(nb)
        dW = base - nb
        dG = g_base - g_nb
        lhs = np.einsum("ip,ip->i", dW, dG)
        dg2 = np.einsum("ip,ip->i", dG, dG)
        v = dW - eta * dG
        v2 = np.einsum("ip,ip->i", v, v)
        if cfg.arch == "two_layer":
            eps = np.array([bounds.eps_t_two_layer(S.c_x, act, cfg.m, cfg.c, S.c0, eta, t_max, di,
                                                   smoothness) for di in dist])
        else:
            eps = np.array([bounds.eps_t_three_layer(S.c_x, act, cfg.m, cfg.c, S.c0, eta, t_max, di,
                                                     w0_norm) for di in dist])
        rhs = coef * dg2 - eps * v2
        scale = np.abs(lhs) + coef * dg2 + eps * v2
        margin = lhs - rhs
        bad = margin < -ROUNDING_RTOL * scale
        record.checks += n
        record.violations += int(np.sum(bad))
        rel = np.where(scale > 0, margin / np.where(scale > 0, scale, 1.0), 0.0)
        j = int(np.argmin(rel))
        if rel[j] < record.worst_margin:
            record.worst_margin = float(rel[j])
            record.worst_step = t
            record.worst_index = j

    return callback


def paired_stability_run(net, S: Dataset, S_prime: Dataset, gd: optimizer.GDConfig, w0,
                         generator=None, n_mc=10000, mc_seed=0, wstar=None,
                         check_coercivity=False, per_step_distances=False) -> StabilityReport:
    """GD on S and on each neighbour S^(i) (z_i replaced by the i-th example of S_prime)."""
    cfg = net.config
    n = S.n
    if S_prime.n != n:
        raise ConfigError("S_prime must contain one replacement per training example")
    w0 = np.asarray(w0, dtype=float)
    c0 = loss.certify_c0(net, w0, S, S_prime)
    S = S.with_c0(c0)
    S_prime = S_prime.with_c0(c0)
    smooth = optimizer.smoothness_constant(net, S)
    if gd.strict and gd.eta > optimizer.max_safe_stepsize(cfg.arch, smooth) * (1 + 1e-12):
        raise ConfigError("eta exceeds the admissible step size (strict mode)")
    X, y = neighbour_stack(S, S_prime)
    record = CoercivityRecord() if check_coercivity else None
    per_step = np.zeros((n, gd.t_max + 1)) if per_step_distances else None
    callback = None
    if check_coercivity or per_step_distances:
        if check_coercivity:
            callback = _coercivity_callback(net, S, S_prime, gd.eta, gd.t_max, smooth, w0,
                                            record, per_step)
        else:
            def callback(t, w, g):
                per_step[:, t] = np.linalg.norm(w[1:] - w[0], axis=1)
    wT, risks = optimizer.gd_run_many(net, X, y, w0, gd.eta, gd.t_max, callback)
    dist = np.linalg.norm(wT[1:] - wT[0], axis=1)
    on_avg = float(np.mean(dist ** 2))
    train_risk = float(risks[0, -1])
    theo_uniform = bounds.uniform_stability_bound(gd.eta, gd.t_max, n, smooth, c0)
    theo_gap = bounds.stability_gap_bound(smooth, n, dist ** 2, train_risk)
    if generator is not None:
        test_risk, se = loss.population_risk_mc(net, wT[0], generator, n_mc, mc_seed)
    else:
        test_risk, se = float("nan"), float("nan")
    w0_norm = float(np.linalg.norm(w0))
    if wstar is not None:
        wstar_dist = float(np.linalg.norm(np.asarray(wstar) - w0))
        wstar_norm = float(np.linalg.norm(wstar))
    else:
        wstar_dist, wstar_norm = 0.0, None
    widths = bounds.width_conditions(cfg.arch, gd.eta, gd.t_max, n, cfg.c, cfg.m, S.c_x, S.c_y,
                                     net.act, c0, w0_norm, wstar_dist, wstar_norm)
    return StabilityReport(
        per_index_distance=dist, on_average_sq=on_avg, uniform_max=float(dist.max()),
        theoretical_uniform=theo_uniform, theoretical_gen_gap=theo_gap,
        empirical_gen_gap=test_risk - train_risk, width_reports=widths,
        certified=all(r.satisfied for r in widths), train_risk=train_risk, test_risk=test_risk,
        test_risk_se=se, smoothness=smooth, c0=c0, eta=gd.eta, t_max=gd.t_max, n=n,
        coercivity=record, per_step_distance=per_step)


def stability_experiment(net, generator, n, gd: optimizer.GDConfig, seed, init_std=0.1,
                         n_mc=10000, check_coercivity=False):
    """Draw S, S' and W0 from one seed and run paired_stability_run."""
    S = generator.sample(n, derive_seed(seed, 1))
    S_prime = generator.sample(n, derive_seed(seed, 2))
    w0 = model.init_params(net.config, init_std, derive_seed(seed, 3))
    wstar = generator.teacher.params if generator.teacher is not None and \
        generator.teacher.net.config == net.config else None
    return paired_stability_run(net, S, S_prime, gd, w0, generator, n_mc, derive_seed(seed, 4),
                                wstar=wstar, check_coercivity=check_coercivity)


def excess_risk_experiment(net, generator, n, gd: optimizer.GDConfig, seeds, init_std=0.1,
                           n_mc=10000, record_every=0):
    """Train once per seed and report risks, gaps, and bound terms at recorded steps.

    Steps recorded: every record_every steps (0 means only t = T) plus t = T. The
    initial point is never recorded since the bound at t = 0 is an empty sum.
    """
    cfg = net.config
    out = []
    for seed in seeds:
        S = generator.sample(n, derive_seed(seed, 1))
        w0 = model.init_params(cfg, init_std, derive_seed(seed, 3))
        c0 = loss.certify_c0(net, w0, S)
        S = S.with_c0(c0)
        smooth = optimizer.smoothness_constant(net, S)
        run_cfg = optimizer.GDConfig(gd.eta, gd.t_max, record_every, gd.strict)
        traj = optimizer.gd_run(net, S, run_cfg, w0, smooth)
        pool = generator.sample(n_mc, derive_seed(seed, 4))
        steps, test, gen_bound = [], [], []
        for t, w in traj.snapshots:
            if t == 0:
                continue
            if steps and t == steps[-1]:
                continue
            steps.append(t)
            test.append(float(np.mean(loss.losses(net, w, pool))))
            gen_bound.append(bounds.generalization_bound(gd.eta, smooth, t, n, traj.risks))
        train = [float(traj.risks[t]) for t in steps]
        rec = {"seed": int(seed), "n": n, "m": cfg.m, "c": cfg.c, "eta": gd.eta, "t_max": gd.t_max,
               "c0": c0, "smoothness": smooth, "steps": steps, "train_risk": train,
               "test_risk": test, "gap": [a - b for a, b in zip(test, train)],
               "gen_bound": gen_bound, "final_train_risk": train[-1], "final_test_risk": test[-1],
               "final_gap": test[-1] - train[-1], "final_gen_bound": gen_bound[-1]}
        if generator.teacher is not None and generator.teacher.net.config == cfg:
            wstar = generator.teacher.params
            dist = float(np.linalg.norm(wstar - w0))
            pop_min = generator.target_risk()
            approx = bounds.approx_error_surrogate(dist, gd.eta, gd.t_max)
            rec["opt_gap"] = train[-1] - loss.empirical_risk(net, wstar, S)
            rec["approx_surrogate"] = approx
            rec["excess_order"] = bounds.excess_risk_bound(cfg.arch, gd.eta, gd.t_max, n, cfg.m,
                                                           cfg.c, pop_min, approx)
            widths = bounds.width_conditions(cfg.arch, gd.eta, gd.t_max, n, cfg.c, cfg.m, S.c_x,
                                             S.c_y, net.act, c0, float(np.linalg.norm(w0)), dist,
                                             float(np.linalg.norm(wstar)))
            rec["width_conditions"] = [r.to_dict() for r in widths]
            rec["certified"] = all(r.satisfied for r in widths)
        out.append(rec)
    return out
