"""Scaled two-layer and three-layer networks with fixed +-1 output weights.

Parameters are handled as flat vectors. Two-layer: W (m x d) row-major.
Three-layer: W1 (m x d) row-major followed by W2 (m x m) row-major.
All batched routines accept leading batch axes on both the parameters
(..., P) and the inputs (..., n, d), so many independent runs can be
advanced with one set of array operations.
"""

from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationSpec, certified_bounds, evaluate
from .errors import ConfigError, DimensionError

ARCHS = ("two_layer", "three_layer")
DEFAULT_HESSIAN_CAP = 2000


@dataclass(frozen=True)
class NetworkConfig:
    arch: str
    m: int
    c: float
    d: int

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ConfigError(f"arch must be one of {ARCHS}, got {self.arch!r}")
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"width m must be a positive integer, got {self.m}")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError(f"input dimension d must be a positive integer, got {self.d}")
        if self.arch == "two_layer" and not (0.5 <= self.c <= 1.0):
            raise ConfigError(f"two-layer scaling c must lie in [1/2, 1], got {self.c}")
        if self.arch == "three_layer" and not (0.5 < self.c <= 1.0):
            raise ConfigError(f"three-layer scaling c must lie in (1/2, 1], got {self.c}")

    @property
    def n_params(self) -> int:
        if self.arch == "two_layer":
            return self.m * self.d
        return self.m * self.d + self.m * self.m


def balanced_signs(m: int) -> np.ndarray:
    """Alternating +1, -1, ... (exactly balanced for even m)."""
    a = np.ones(m)
    a[1::2] = -1.0
    return a


def random_signs(m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.choice(np.array([-1.0, 1.0]), size=m)


@dataclass(frozen=True, eq=False)
class Network:
    """Architecture, output signs and activation bundled together."""

    config: NetworkConfig
    signs: np.ndarray
    act: ActivationSpec = field(default_factory=lambda: certified_bounds("sigmoid"))

    def __post_init__(self):
        a = np.array(self.signs, dtype=float)
        if a.shape != (self.config.m,):
            raise DimensionError(f"signs must have length m={self.config.m}, got shape {a.shape}")
        if not np.all(np.abs(a) == 1.0):
            raise ConfigError("output signs must be exactly +1 or -1")
        a.setflags(write=False)
        object.__setattr__(self, "signs", a)

    @classmethod
    def build(cls, arch, m, c, d, activation="sigmoid", signs="balanced", sign_seed=0):
        config = NetworkConfig(arch, int(m), float(c), int(d))
        if isinstance(signs, str):
            if signs == "balanced":
                a = balanced_signs(config.m)
            elif signs == "random":
                a = random_signs(config.m, sign_seed)
            else:
                raise ConfigError(f"signs must be 'balanced' or 'random', got {signs!r}")
        else:
            a = signs
        return cls(config, a, certified_bounds(activation))

    @property
    def n_params(self) -> int:
        return self.config.n_params


def init_params(config: NetworkConfig, std: float = 0.1, seed: int = 0) -> np.ndarray:
    """W0 with i.i.d. N(0, std^2) entries; std=0 gives the zero initialisation."""
    if std < 0:
        raise ConfigError("init std must be nonnegative")
    rng = np.random.default_rng(seed)
    return std * rng.standard_normal(config.n_params)


def split_params(config: NetworkConfig, w):
    """Reshape flat parameters (..., P) into weight matrices (views)."""
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != config.n_params:
        raise DimensionError(f"expected {config.n_params} parameters, got {w.shape[-1]}")
    lead = w.shape[:-1]
    m, d = config.m, config.d
    if config.arch == "two_layer":
        return (w.reshape(lead + (m, d)),)
    return (w[..., : m * d].reshape(lead + (m, d)), w[..., m * d:].reshape(lead + (m, m)))


def join_params(*blocks) -> np.ndarray:
    """Inverse of split_params."""
    blocks = [np.asarray(b, dtype=float) for b in blocks]
    lead = blocks[0].shape[:-2]
    return np.concatenate([b.reshape(lead + (-1,)) for b in blocks], axis=-1)


def _check_inputs(config, X):
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != config.d:
        raise DimensionError(f"input dimension {X.shape[-1]} != d={config.d}")
    return X


def _forward_cache(net: Network, w, X):
    cfg = net.config
    X = _check_inputs(cfg, X)
    scale = float(cfg.m) ** (-cfg.c)
    a = net.signs
    if cfg.arch == "two_layer":
        (W,) = split_params(cfg, w)
        pre = X @ np.swapaxes(W, -1, -2)
        s, s1, _ = evaluate(net.act.kind, pre, 1)
        f = scale * (s @ a)
        return f, (X, s1)
    W1, W2 = split_params(cfg, w)
    u = X @ np.swapaxes(W1, -1, -2)
    A, A1, _ = evaluate(net.act.kind, u, 1)
    h = scale * (A @ np.swapaxes(W2, -1, -2))
    S, S1, _ = evaluate(net.act.kind, h, 1)
    f = scale * (S @ a)
    return f, (X, A, A1, S1, W2)


def _weighted_backward(net: Network, cache, r):
    """sum_n r_n grad f(x_n) from a forward cache; r has shape (..., n)."""
    cfg = net.config
    a = net.signs
    if cfg.arch == "two_layer":
        X, s1 = cache
        coef = (r[..., :, None] * s1) * (a * float(cfg.m) ** (-cfg.c))
        G = np.swapaxes(coef, -1, -2) @ X
        return G.reshape(G.shape[:-2] + (-1,))
    X, A, A1, S1, W2 = cache
    v = (r[..., :, None] * S1) * (a * float(cfg.m) ** (-2.0 * cfg.c))
    G2 = np.swapaxes(v, -1, -2) @ A
    back = (v @ W2) * A1
    G1 = np.swapaxes(back, -1, -2) @ X
    return join_params(G1, G2)


def forward_batch(net: Network, w, X) -> np.ndarray:
    """f_W(x_j) for every row of X; shape (..., n)."""
    return _forward_cache(net, w, X)[0]


def forward(net: Network, w, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("x must be a vector")
    return float(forward_batch(net, w, x[None, :])[0])


def forward_and_weighted_grad(net: Network, w, X, weights_fn):
    """Return f on X and sum_n r_n grad f(x_n) with r = weights_fn(f)."""
    f, cache = _forward_cache(net, w, X)
    r = weights_fn(f)
    return f, _weighted_backward(net, cache, r)


def grad_batch(net: Network, w, X) -> np.ndarray:
    """Per-example gradients of f; shape (..., n, P)."""
    cfg = net.config
    f, cache = _forward_cache(net, w, X)
    a = net.signs
    if cfg.arch == "two_layer":
        X, s1 = cache
        coef = s1 * (a * float(cfg.m) ** (-cfg.c))
        G = coef[..., :, :, None] * X[..., :, None, :]
        return G.reshape(G.shape[:-2] + (-1,))
    X, A, A1, S1, W2 = cache
    v = S1 * (a * float(cfg.m) ** (-2.0 * cfg.c))
    G2 = v[..., :, :, None] * A[..., :, None, :]
    back = (v @ W2) * A1
    G1 = back[..., :, :, None] * X[..., :, None, :]
    return join_params(G1, G2)


def grad_f(net: Network, w, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("x must be a vector")
    return grad_batch(net, w, x[None, :])[0]


def hessian_f(net: Network, w, x, cap: int = DEFAULT_HESSIAN_CAP) -> np.ndarray:
    """Dense Hessian of f_W(x) with respect to the flat parameters."""
    cfg = net.config
    P = cfg.n_params
    if P > cap:
        raise ConfigError(f"Hessian dimension {P} exceeds cap {cap}")
    x = _check_inputs(cfg, x)
    if x.ndim != 1:
        raise DimensionError("x must be a vector")
    w = np.asarray(w, dtype=float)
    if w.shape != (P,):
        raise DimensionError(f"expected {P} parameters, got shape {w.shape}")
    m, d = cfg.m, cfg.d
    scale = float(m) ** (-cfg.c)
    a = net.signs
    xx = np.outer(x, x)
    H = np.zeros((P, P))
    if cfg.arch == "two_layer":
        (W,) = split_params(cfg, w)
        _, _, s2 = evaluate(net.act.kind, W @ x)
        for k in range(m):
            H[k * d:(k + 1) * d, k * d:(k + 1) * d] = scale * a[k] * s2[k] * xx
        return H

    W1, W2 = split_params(cfg, w)
    u = W1 @ x
    A, A1, A2 = evaluate(net.act.kind, u)
    h = scale * (W2 @ A)
    _, S1, S2 = evaluate(net.act.kind, h)
    # J[i] = grad of h_i over the flat parameters
    J = np.zeros((m, P))
    J1 = J[:, : m * d].reshape(m, m, d)
    J1[:] = scale * (W2 * A1)[:, :, None] * x
    J2 = J[:, m * d:].reshape(m, m, m)
    for i in range(m):
        J2[i, i, :] = scale * A
    # outer curvature: sum_i a_i sigma''(h_i) grad h_i grad h_i^T
    H += scale * (J.T * (a * S2)) @ J
    # inner curvature: sum_i a_i sigma'(h_i) Hess h_i
    v = a * S1
    back = v @ W2
    for k in range(m):
        rk = slice(k * d, (k + 1) * d)
        H[rk, rk] += scale * scale * back[k] * A2[k] * xx
        for i in range(m):
            col = m * d + i * m + k
            blk = scale * scale * v[i] * A1[k] * x
            H[rk, col] += blk
            H[col, rk] += blk
    # matmul rounding can break bitwise symmetry
    return 0.5 * (H + H.T)
