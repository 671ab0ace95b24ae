"""Full-batch gradient descent with constant step size and trajectory recording."""

from dataclasses import dataclass, field

import numpy as np

from . import bounds, loss
from .errors import ConfigError, DivergenceError

DIVERGENCE_PATIENCE = 5


@dataclass(frozen=True)
class GDConfig:
    eta: float
    t_max: int
    snapshot_stride: int = 0  # 0 keeps only W0 and W_T
    strict: bool = True

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if int(self.t_max) != self.t_max or self.t_max < 1:
            raise ConfigError(f"t_max must be a positive integer, got {self.t_max}")
        if self.snapshot_stride < 0:
            raise ConfigError("snapshot_stride must be nonnegative")


@dataclass
class Trajectory:
    snapshots: list              # (t, params) pairs
    risks: np.ndarray            # L_S(W_t), t = 0..T
    deviations: np.ndarray       # ||W_t - W0||
    grad_norms: np.ndarray       # ||grad L_S(W_t)||
    w0: np.ndarray
    final: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_rows(self):
        return [(t, float(self.risks[t]), float(self.deviations[t]), float(self.grad_norms[t]))
                for t in range(len(self.risks))]


def max_safe_stepsize(arch: str, smoothness: float) -> float:
    """1/(2 rho) for two layers, 1/(8 rho_hat) for three layers."""
    if smoothness <= 0:
        raise ConfigError("smoothness constant must be positive")
    if arch == "two_layer":
        return 1.0 / (2.0 * smoothness)
    if arch == "three_layer":
        return 1.0 / (8.0 * smoothness)
    raise ConfigError(f"unknown arch {arch!r}")


def smoothness_constant(net, S) -> float:
    """rho (two-layer) or rho_hat (three-layer) for a dataset with certified c0."""
    if S.c0 is None:
        raise ConfigError("dataset c0 has not been certified")
    act = net.act
    cfg = net.config
    if cfg.arch == "two_layer":
        return bounds.rho_two_layer(S.c_x, S.c_y, act, cfg.m, cfg.c)
    return bounds.three_layer_constants(S.c_x, act, S.c0)[2]


def gd_step(params, grad, eta):
    """W - eta * grad."""
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise DivergenceError("non-finite gradient")
    return np.asarray(params, dtype=float) - eta * grad


def gd_run(net, S, gd: GDConfig, w0, smoothness=None) -> Trajectory:
    """Run T steps of GD on L_S from w0 and record per-step scalars.

    In strict mode the step size must satisfy the admissibility rule for the
    architecture and a run whose risk rises for DIVERGENCE_PATIENCE consecutive
    steps is aborted.
    """
    arch = net.config.arch
    if smoothness is None and gd.strict:
        smoothness = smoothness_constant(net, S)
    if gd.strict and gd.eta > max_safe_stepsize(arch, smoothness) * (1 + 1e-12):
        raise ConfigError(f"eta={gd.eta} exceeds the admissible step "
                          f"{max_safe_stepsize(arch, smoothness)} (strict mode)")
    T = int(gd.t_max)
    w0 = np.array(w0, dtype=float)
    w = w0.copy()
    risks = np.empty(T + 1)
    devs = np.empty(T + 1)
    gnorms = np.empty(T + 1)
    snaps = [(0, w0.copy())]
    rises = 0
    for t in range(T + 1):
        r, g = loss.risk_and_grad(net, w, S.X, S.y)
        if not (np.isfinite(r) and np.all(np.isfinite(g))):
            raise DivergenceError(f"non-finite risk or gradient at step {t}", t, risks[:t])
        risks[t] = r
        devs[t] = np.linalg.norm(w - w0)
        gnorms[t] = np.linalg.norm(g)
        if t > 0:
            rises = rises + 1 if risks[t] > risks[t - 1] else 0
            if gd.strict and rises >= DIVERGENCE_PATIENCE:
                raise DivergenceError(f"risk increased for {rises} consecutive steps", t,
                                      risks[:t + 1].copy())
            if gd.snapshot_stride and t % gd.snapshot_stride == 0 and t < T:
                snaps.append((t, w.copy()))
        if t == T:
            break
        w = gd_step(w, g, gd.eta)
    snaps.append((T, w.copy()))
    return Trajectory(snaps, risks, devs, gnorms, w0, w,
                      {"eta": gd.eta, "t_max": T, "strict": gd.strict, "smoothness": smoothness})


def gd_run_many(net, X, y, w0, eta, t_max, callback=None):
    """Advance independent runs in lockstep.

    X (R, n, d), y (R, n), w0 (P,) or (R, P). Returns final params (R, P) and
    risks (R, T+1). callback(t, w, g) sees every iterate before its update.
    """
    R = X.shape[0]
    w = np.broadcast_to(np.asarray(w0, dtype=float), (R, w0.shape[-1])).copy(order="C")
    risks = np.empty((R, t_max + 1))
    for t in range(t_max + 1):
        r, g = loss.risk_and_grad(net, w, X, y)
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite gradient at step {t}", t)
        risks[:, t] = r
        if callback is not None:
            callback(t, w, g)
        if t == t_max:
            break
        w = w - eta * g
    return w, risks
