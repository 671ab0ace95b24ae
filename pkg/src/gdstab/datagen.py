"""Seeded synthetic regression data inside the ||x|| <= c_x, |y| <= c_y envelopes."""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import truncnorm

from . import model
from .errors import ConfigError, DimensionError
from .loss import Dataset


def derive_seed(*keys: int) -> int:
    """Deterministic 32-bit seed for a tuple of integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


@dataclass(frozen=True)
class GenConfig:
    d: int
    c_x: float = 1.0
    c_y: float = 1.0
    noise_std: float = 0.0
    seed: int = 0
    noise_trunc: float = 3.0  # noise truncated to +-noise_trunc * noise_std

    def __post_init__(self):
        if self.d < 1 or self.c_x <= 0 or self.c_y <= 0:
            raise ConfigError("d, c_x and c_y must be positive")
        if self.noise_std < 0 or self.noise_trunc <= 0:
            raise ConfigError("noise_std must be >= 0 and noise_trunc > 0")


@dataclass(frozen=True, eq=False)
class TeacherSpec:
    """Designated minimiser W* realising the regression function."""

    net: model.Network
    params: np.ndarray
    mu_target: float | None = None

    def __post_init__(self):
        p = np.array(self.params, dtype=float)
        if p.shape != (self.net.n_params,):
            raise DimensionError("teacher parameters do not match the teacher network")
        p.setflags(write=False)
        object.__setattr__(self, "params", p)

    def digest(self) -> str:
        h = hashlib.sha256()
        cfg = self.net.config
        h.update(f"{cfg.arch}|{cfg.m}|{cfg.c!r}|{cfg.d}|{self.net.act.kind}".encode())
        h.update(self.net.signs.tobytes())
        h.update(self.params.tobytes())
        return h.hexdigest()[:16]


def rescale_to_mu(params, m: int, mu: float) -> np.ndarray:
    """Scale by min(1, m^(1/2 - mu) / ||W||) so that ||W|| <= m^(1/2 - mu)."""
    params = np.asarray(params, dtype=float)
    norm = float(np.linalg.norm(params))
    if norm == 0.0:
        raise ConfigError("cannot rescale zero parameters")
    budget = float(m) ** (0.5 - mu)
    return params * min(1.0, budget / norm)


def make_teacher(net: model.Network, seed: int, std: float = 1.0, mu_target=None) -> TeacherSpec:
    w = model.init_params(net.config, std=std, seed=seed)
    if mu_target is not None:
        w = rescale_to_mu(w, net.config.m, mu_target)
    return TeacherSpec(net, w, mu_target)


def sample_ball(rng, n: int, d: int, radius: float) -> np.ndarray:
    """n points uniform in the closed d-ball of the given radius."""
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    X = g * r[:, None]
    # guard against a final rounding step past the radius
    norms = np.linalg.norm(X, axis=1)
    over = norms > radius
    X[over] *= (radius / norms[over])[:, None] * (1.0 - 1e-15)
    return X


class DataGenerator:
    """Draws datasets from one fixed distribution P (inputs, teacher, noise)."""

    def __init__(self, gen: GenConfig, teacher: TeacherSpec | None = None):
        if teacher is not None and teacher.net.config.d != gen.d:
            raise DimensionError(f"teacher d={teacher.net.config.d} != generator d={gen.d}")
        self.gen = gen
        self.teacher = teacher

    def noise_variance(self) -> float:
        """Variance of the truncated Gaussian label noise."""
        if self.gen.noise_std == 0:
            return 0.0
        k = self.gen.noise_trunc
        return float(truncnorm.var(-k, k)) * self.gen.noise_std ** 2

    def target_risk(self) -> float:
        """Risk of the regression function itself, 0.5 * Var(noise), ignoring clipping."""
        return 0.5 * self.noise_variance()

    def sample(self, n: int, seed: int) -> Dataset:
        if n < 1:
            raise ConfigError("n must be at least 1")
        g = self.gen
        rng = np.random.default_rng(derive_seed(g.seed, seed))
        X = sample_ball(rng, n, g.d, g.c_x)
        if self.teacher is not None:
            y = model.forward_batch(self.teacher.net, self.teacher.params, X)
        else:
            y = np.zeros(n)
        if g.noise_std > 0:
            k = g.noise_trunc
            y = y + truncnorm.rvs(-k, k, scale=g.noise_std, size=n, random_state=rng)
        clipped = int(np.sum(np.abs(y) > g.c_y))
        y = np.clip(y, -g.c_y, g.c_y)
        return Dataset(X, y, g.c_x, g.c_y, None, clipped)


def save_dataset(S: Dataset, path, meta: dict | None = None) -> None:
    """Write X columns and y to CSV plus a JSON sidecar with the envelope constants."""
    path = Path(path)
    header = ",".join([f"x{j}" for j in range(S.d)] + ["y"])
    data = np.column_stack([S.X, S.y])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
    side = {"c_x": S.c_x, "c_y": S.c_y, "c0": S.c0, "n_clipped": S.n_clipped}
    side.update(meta or {})
    path.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")


def load_dataset(path) -> Dataset:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    side = json.loads(path.with_suffix(".json").read_text())
    return Dataset(data[:, :-1], data[:, -1], side["c_x"], side["c_y"], side.get("c0"),
                   side.get("n_clipped", 0))
