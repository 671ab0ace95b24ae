"""Squared loss, empirical risk, their derivatives and Monte Carlo population risk."""

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import ConfigError, DimensionError


@dataclass(frozen=True)
class Example:
    x: np.ndarray
    y: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """n examples stored as arrays X (n x d) and y (n,) with envelope constants.

    c0 is None until certify_c0 has been run against a concrete initialisation.
    """

    X: np.ndarray
    y: np.ndarray
    c_x: float
    c_y: float
    c0: float | None = None
    n_clipped: int = 0

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DimensionError(f"X must be (n, d) and y (n,), got {X.shape} and {y.shape}")
        if X.shape[0] == 0:
            raise ConfigError("dataset must be nonempty")
        if np.any(np.linalg.norm(X, axis=1) > self.c_x):
            raise ConfigError("an input violates ||x|| <= c_x")
        if np.any(np.abs(y) > self.c_y):
            raise ConfigError("a label violates |y| <= c_y")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def examples(self):
        return [Example(self.X[i], float(self.y[i])) for i in range(self.n)]

    @property
    def clipped(self) -> bool:
        return self.n_clipped > 0

    def with_c0(self, c0: float) -> "Dataset":
        return Dataset(self.X, self.y, self.c_x, self.c_y, float(c0), self.n_clipped)


def certify_c0(net, w0, *datasets) -> float:
    """max of l(0; z) and l(W0; z) over every example of the given datasets."""
    zero = np.zeros(net.n_params)
    c0 = 0.0
    for S in datasets:
        for w in (zero, w0):
            c0 = max(c0, float(np.max(losses(net, w, S))))
    return c0


def _residuals(net, w, S: Dataset):
    return model.forward_batch(net, w, S.X) - S.y


def losses(net, w, S: Dataset) -> np.ndarray:
    r = _residuals(net, w, S)
    return 0.5 * r * r


def pointwise_loss(net, w, z: Example) -> float:
    r = model.forward(net, w, z.x) - z.y
    return 0.5 * r * r


def empirical_risk(net, w, S: Dataset) -> float:
    """(1/2n) sum_i (f_W(x_i) - y_i)^2."""
    return float(np.mean(losses(net, w, S)))


def loss_grad(net, w, z: Example) -> np.ndarray:
    """(f - y) grad f."""
    r = model.forward(net, w, z.x) - z.y
    return r * model.grad_f(net, w, z.x)


def risk_grad(net, w, S: Dataset) -> np.ndarray:
    n = S.n
    _, g = model.forward_and_weighted_grad(net, w, S.X, lambda f: (f - S.y) / n)
    return g


def risk_and_grad(net, w, X, y):
    """Batched empirical risk and gradient; w (..., P), X (..., n, d), y (..., n)."""
    n = X.shape[-2]
    res = {}

    def weights(f):
        res["r"] = f - y
        return res["r"] / n

    _, g = model.forward_and_weighted_grad(net, w, X, weights)
    r = res["r"]
    return 0.5 * np.mean(r * r, axis=-1), g


def loss_hessian(net, w, z: Example, cap: int = model.DEFAULT_HESSIAN_CAP) -> np.ndarray:
    """grad f grad f^T + (f - y) Hess f."""
    g = model.grad_f(net, w, z.x)
    r = model.forward(net, w, z.x) - z.y
    H = np.outer(g, g) + r * model.hessian_f(net, w, z.x, cap=cap)
    return 0.5 * (H + H.T)


def risk_hessian(net, w, S: Dataset, cap: int = model.DEFAULT_HESSIAN_CAP) -> np.ndarray:
    H = np.zeros((net.n_params, net.n_params))
    for z in S.examples:
        H += loss_hessian(net, w, z, cap=cap)
    return H / S.n


def population_risk_mc(net, w, generator, n_mc: int, seed: int):
    """Sample mean of pointwise losses on n_mc fresh examples and its standard error."""
    if n_mc < 100:
        raise ConfigError("n_mc must be at least 100")
    if generator.gen.d != net.config.d:
        raise ConfigError(f"generator dimension {generator.gen.d} != network d={net.config.d}")
    S = generator.sample(n_mc, seed)
    ell = losses(net, w, S)
    return float(np.mean(ell)), float(np.std(ell, ddof=1) / np.sqrt(n_mc))
