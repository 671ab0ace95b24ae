"""Smooth activations with certified bounds on the value and first two derivatives."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SUPPORTED = ("sigmoid", "tanh")


@dataclass(frozen=True)
class ActivationSpec:
    kind: str
    b_sigma: float   # sup |sigma|
    b_sigma1: float  # sup |sigma'|
    b_sigma2: float  # sup |sigma''|

    def __post_init__(self):
        if self.kind not in SUPPORTED:
            raise ConfigError(f"unsupported activation {self.kind!r}")
        for name in ("b_sigma", "b_sigma1", "b_sigma2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive and finite, got {v}")


def certified_bounds(kind: str) -> ActivationSpec:
    """Analytic suprema of |sigma|, |sigma'|, |sigma''|.

    sigmoid: sigma'' = s(1-s)(1-2s) peaks at s = 1/2 -+ 1/(2 sqrt 3), giving 1/(6 sqrt 3).
    tanh: sigma'' = -2 t (1-t^2) peaks at t = 1/sqrt 3, giving 4/(3 sqrt 3).
    """
    if kind == "relu":
        raise ConfigError("relu is not twice differentiable; use sigmoid or tanh")
    if kind == "sigmoid":
        return ActivationSpec("sigmoid", 1.0, 0.25, 1.0 / (6.0 * math.sqrt(3.0)))
    if kind == "tanh":
        return ActivationSpec("tanh", 1.0, 1.0, 4.0 / (3.0 * math.sqrt(3.0)))
    raise ConfigError(f"unsupported activation {kind!r}; expected one of {SUPPORTED}")


def evaluate(kind: str, a, order: int = 2):
    """Vectorised (sigma, sigma', sigma'') for an array of pre-activations.

    With order=1 the last entry is None.
    """
    a = np.asarray(a, dtype=float)
    if kind == "sigmoid":
        # 0.5(1 + tanh(a/2)) avoids overflow in exp for large |a|
        s = 0.5 * (1.0 + np.tanh(0.5 * a))
        d1 = s * (1.0 - s)
        return s, d1, (d1 * (1.0 - 2.0 * s) if order > 1 else None)
    if kind == "tanh":
        t = np.tanh(a)
        d1 = 1.0 - t * t
        return t, d1, (-2.0 * t * d1 if order > 1 else None)
    raise ConfigError(f"unsupported activation {kind!r}")


def activation_eval(spec: ActivationSpec, a: float):
    """Scalar (sigma(a), sigma'(a), sigma''(a)); rejects non-finite input."""
    a = float(a)
    if not math.isfinite(a):
        raise ValueError(f"activation input must be finite, got {a}")
    v, d1, d2 = evaluate(spec.kind, a)
    return float(v), float(d1), float(d2)
