"""Closed-form constants, envelopes, stability and generalization bounds, width
conditions and the (c, mu) region classifier.

Every function here is a pure evaluation of a formula. Activation bounds are
read from an ActivationSpec as B = b_sigma, B1 = b_sigma1, B2 = b_sigma2.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationSpec
from .errors import ConfigError

E = math.e


# ----------------------------------------------------------------------------
# two-layer

def rho_two_layer(c_x, c_y, act: ActivationSpec, m, c) -> float:
    """Global smoothness constant of the two-layer squared loss."""
    B, B1, B2 = act.b_sigma, act.b_sigma1, act.b_sigma2
    return c_x ** 2 * ((B1 ** 2 + B * B2) / m ** (2 * c - 1) + B2 * c_y / m ** c)


def grad_sq_bound_two_layer(c_x, act: ActivationSpec, m, c) -> float:
    """Upper bound on ||grad f||^2."""
    return act.b_sigma1 ** 2 * c_x ** 2 / m ** (2 * c - 1)


def hessian_f_bound_two_layer(c_x, act: ActivationSpec, m, c) -> float:
    """Upper bound on the operator norm of Hess f."""
    return c_x ** 2 * act.b_sigma2 / m ** c


def lipschitz_two_layer(c_x, act: ActivationSpec, m, c) -> float:
    """|f_W(x) - f_W'(x)| <= L ||W - W'||."""
    return c_x * act.b_sigma1 * m ** (0.5 - c)


def curvature_lower_bound_two_layer(c_x, act: ActivationSpec, m, c, dist_from_init, c0) -> float:
    """Lower bound on lambda_min of the loss Hessian at distance dist from W0."""
    if dist_from_init < 0:
        raise ValueError("distance must be nonnegative")
    B1, B2 = act.b_sigma1, act.b_sigma2
    return -(c_x ** 3 * B1 * B2 * m ** (0.5 - 2 * c) * dist_from_init
             + c_x ** 2 * B2 * math.sqrt(2 * c0) * m ** (-c))


def curvature_lower_bound_two_layer_displayed(c_x, act: ActivationSpec, m, c, dist_from_init, c0):
    """Variant whose constant term carries B_sigma instead of B_sigma''.

    Reported next to the main lower bound; it is looser for sigmoid and tanh.
    """
    B, B1, B2 = act.b_sigma, act.b_sigma1, act.b_sigma2
    return -(c_x ** 3 * B1 * B2 * m ** (0.5 - 2 * c) * dist_from_init
             + c_x ** 2 * B * math.sqrt(2 * c0) * m ** (-c))


def b_tilde(c_x, act: ActivationSpec, m, c, c0, halved=False) -> float:
    """Curvature constant of the optimization-error bound.

    halved=True applies the extra factor 1/2 used by the tighter derivation.
    """
    v = c_x ** 2 * act.b_sigma2 * (2 * act.b_sigma1 * c_x / m ** (c - 0.5) + math.sqrt(2 * c0))
    return 0.5 * v if halved else v


def width_constants_two_layer(c_x, act: ActivationSpec, c, c0):
    """Explicit constants (C1, C2, C3) of the stability width condition."""
    B1, B2 = act.b_sigma1, act.b_sigma2
    s = math.sqrt(2 * c0)
    C1 = (8 * E * c_x ** 2 * B1 * B2 * s) ** (2 / (4 * c - 1))
    C2 = (4 * s * c_x ** 2 * B1 * B2) ** (3 / (4 * c - 1))
    C3 = (8 * s * c_x * B2) ** (1 / c)
    return C1, C2, C3


@dataclass(frozen=True)
class TwoLayerConstants:
    rho: float
    b_tilde: float
    c1: float
    c2: float
    c3: float


def two_layer_constants(c_x, c_y, act: ActivationSpec, m, c, c0) -> TwoLayerConstants:
    C1, C2, C3 = width_constants_two_layer(c_x, act, c, c0)
    return TwoLayerConstants(rho_two_layer(c_x, c_y, act, m, c), b_tilde(c_x, act, m, c, c0),
                             C1, C2, C3)


def eps_t_two_layer(c_x, act: ActivationSpec, m, c, c0, eta, t_max, pair_dist, rho) -> float:
    """Weak-convexity level along the segment between paired iterates."""
    B1, B2 = act.b_sigma1, act.b_sigma2
    lead = c_x ** 2 * B2 / m ** c
    k = c_x * B1 / m ** (c - 0.5)
    return lead * (k * (1 + eta * rho) * pair_dist + k * math.sqrt(2 * eta * t_max * c0)
                   + math.sqrt(2 * c0))


# ----------------------------------------------------------------------------
# three-layer

@dataclass(frozen=True)
class ThreeLayerConstants:
    b1: float
    b2: float
    rho_hat: float
    b3: float
    b_cal_t: float = float("nan")   # sqrt(eta T) + ||W0||
    c_t_n: float = float("nan")     # eta T + eta^3 T^2 / n^2
    c3_t: float = float("nan")
    extras: dict = field(default_factory=dict)


def three_layer_b1_b2(c_x, act: ActivationSpec, c0):
    B, B1, B2 = act.b_sigma, act.b_sigma1, act.b_sigma2
    b1 = max(B1 ** 2 * B2 * c_x ** 2, B1 * B2 * c_x ** 2, 2 * B2 * B * c_x, B2 * B ** 2,
             2 * B2 ** 2 * c_x)
    b2 = max(B1 ** 4 * c_x ** 2, B1 ** 2 * B2 ** 2, B2 * B, math.sqrt(2 * c0))
    return b1, b2


def rho_hat(b1, b2) -> float:
    return 4 * b2 * (1 + 2 * b1)


def three_layer_constants(c_x, act: ActivationSpec, c0):
    """(B1, B2, rho_hat)."""
    b1, b2 = three_layer_b1_b2(c_x, act, c0)
    return b1, b2, rho_hat(b1, b2)


def b3_constant(c_x, act: ActivationSpec, c0) -> float:
    """Constant making the gradient-norm factor of the co-coercivity level explicit.

    Chosen so that
      (B1^2 c_x / m^(2c-1/2)) * 2 (sqrt(2 c0 eta T) + ||W0||) + B1 B / m^(2c-1)
        <= B3 * ((sqrt(eta T) + ||W0||) / m^(2c-1/2) + m^(1-2c)).
    """
    B, B1 = act.b_sigma, act.b_sigma1
    return max(2 * B1 ** 2 * c_x * max(math.sqrt(2 * c0), 1.0), B1 * B)


def c_w_three_layer(w2_norm, m, c, c_x, act: ActivationSpec) -> float:
    """Operator-norm bound on Hess f as a function of ||W2||."""
    B, B1, B2 = act.b_sigma, act.b_sigma1, act.b_sigma2
    return (B1 ** 2 * B2 * c_x ** 2 / m ** (3 * c) * w2_norm ** 2
            + (B1 * B2 * c_x ** 2 / m ** (2 * c - 0.5) + 2 * B2 * B1 * B * c_x / m ** (3 * c - 0.5))
            * w2_norm
            + B2 * B ** 2 / m ** (3 * c - 1)
            + 2 * B1 ** 2 * c_x / m ** (2 * c - 0.5))


def grad_sq_bound_three_layer(w2_norm, m, c, c_x, act: ActivationSpec) -> float:
    B, B1 = act.b_sigma, act.b_sigma1
    return B1 ** 4 * c_x ** 2 / m ** (4 * c - 1) * w2_norm ** 2 + B1 ** 2 * B ** 2 / m ** (4 * c - 2)


def rho_w_three_layer(w2_norm, m, c, c_x, act: ActivationSpec, c0) -> float:
    B, B1 = act.b_sigma, act.b_sigma1
    cw = c_w_three_layer(w2_norm, m, c, c_x, act)
    return (grad_sq_bound_three_layer(w2_norm, m, c, c_x, act)
            + cw * (B1 * B / m ** (2 * c - 1) * w2_norm + math.sqrt(2 * c0)))


def rho_w_and_c_w(w2, m, c, c_x, act: ActivationSpec, c0):
    """(rho_W, C_W) for a second-layer matrix W2 (Frobenius norm)."""
    n2 = float(np.linalg.norm(w2))
    return rho_w_three_layer(n2, m, c, c_x, act, c0), c_w_three_layer(n2, m, c, c_x, act)


def curvature_lower_bound_three_layer(w2_norm, m, c, c_x, act: ActivationSpec, c0,
                                      doubled=False) -> float:
    """-C_W (B1 B m^(1-2c) ||W2|| + sqrt(2 c0)); doubled=True uses a factor 2 on the first term."""
    B, B1 = act.b_sigma, act.b_sigma1
    k = 2.0 if doubled else 1.0
    cw = c_w_three_layer(w2_norm, m, c, c_x, act)
    return -cw * (k * B1 * B * m ** (1 - 2 * c) * w2_norm + math.sqrt(2 * c0))


def lipschitz_three_layer(w2_diff_norm, w1_diff_norm, w2_tilde_maxabs, m, c, c_x,
                          act: ActivationSpec) -> float:
    """Bound on |f_W(x) - f_W~(x)| from the layer-wise distances; uses max |W~2_ij|."""
    B, B1 = act.b_sigma, act.b_sigma1
    return (B1 * B / m ** (2 * c - 1) * w2_diff_norm
            + B1 ** 2 * c_x * w2_tilde_maxabs / m ** (2 * c - 1.5) * w1_diff_norm)


def c3_t(b1, m, c, c0, eta, t_max) -> float:
    s = math.sqrt(2 * c0 * eta * t_max)
    return 4 * b1 * (2 * c0 * eta * t_max * m ** (-3 * c) + (m ** (0.5 - 2 * c) + m ** (0.5 - 3 * c)) * s
                     + m ** (1 - 3 * c) + m ** (0.5 - 2 * c))


def eps_t_three_layer(c_x, act: ActivationSpec, m, c, c0, eta, t_max, pair_dist, w0_norm) -> float:
    """Weak-convexity level along the segment between paired three-layer iterates.

    The sqrt(2 c0) term sits outside the B3 product, as in the derivation.
    """
    b1, b2, rh = three_layer_constants(c_x, act, c0)
    b3 = b3_constant(c_x, act, c0)
    geo = (math.sqrt(eta * t_max) + w0_norm) / m ** (2 * c - 0.5) + m ** (1 - 2 * c)
    span = (1 + eta * rh) * pair_dist + 2 * (math.sqrt(2 * c0 * eta * t_max) + w0_norm)
    return c3_t(b1, m, c, c0, eta, t_max) * (b3 * geo * span + math.sqrt(2 * c0))


def c_hat_w(w_norm, w0_norm, b1, m, c, c0, eta, t_max, drop_w0=False) -> float:
    """Uniform curvature constant around a reference point W.

    Default keeps the ||W0|| terms; drop_w0=True drops them.
    """
    s = 2 * c0 * eta * t_max
    if drop_w0:
        return 4 * b1 * (m ** (-3 * c) * (w_norm ** 2 + s) + m ** (0.5 - 2 * c) * (w_norm + math.sqrt(s)))
    return 4 * b1 * (m ** (-3 * c) * (w_norm ** 2 + 2 * s + 2 * w0_norm ** 2)
                     + m ** (0.5 - 2 * c) * (w_norm + math.sqrt(s) + w0_norm))


def b_hat_w(w_norm, w0_norm, dist_w_w0, m, c, c_x, act: ActivationSpec, c0, eta, t_max,
            drop_w0=False) -> float:
    """Companion factor of c_hat_w. Default keeps the ||W0|| terms."""
    B, B1 = act.b_sigma, act.b_sigma1
    s = math.sqrt(2 * c0 * eta * t_max)
    if drop_w0:
        return (B1 ** 2 * c_x / m ** (2 * c - 0.5) * (s + w_norm) + B1 * B / m ** (2 * c - 1)) \
            * (2 * s + w_norm) + math.sqrt(2 * c0)
    return (B1 ** 2 * c_x / m ** (2 * c - 0.5) * (2 * s + dist_w_w0) + B1 * B / m ** (2 * c - 1)) \
        * (2 * s + w0_norm + dist_w_w0) + math.sqrt(2 * c0)


def three_layer_full_constants(c_x, act, c0, eta, t_max, n, m, c, w0_norm) -> ThreeLayerConstants:
    b1, b2, rh = three_layer_constants(c_x, act, c0)
    return ThreeLayerConstants(
        b1=b1, b2=b2, rho_hat=rh, b3=b3_constant(c_x, act, c0),
        b_cal_t=math.sqrt(eta * t_max) + w0_norm,
        c_t_n=eta * t_max + eta ** 3 * t_max ** 2 / n ** 2,
        c3_t=c3_t(b1, m, c, c0, eta, t_max),
    )


# ----------------------------------------------------------------------------
# stability and generalization

def uniform_stability_bound(eta, t_max, n, smoothness, c0) -> float:
    """2 e eta T sqrt(2 c0 r (r eta T + 2)) / n, with r = rho or rho_hat."""
    r = smoothness
    return 2 * E * eta * t_max * math.sqrt(2 * c0 * r * (r * eta * t_max + 2)) / n


def generalization_coefficient(eta, smoothness, t, n) -> float:
    r = smoothness
    return 4 * E ** 2 * eta ** 2 * r ** 2 * t / n ** 2 + 4 * E * eta * r / n


def generalization_bound(eta, smoothness, t, n, risk_history) -> float:
    """Coefficient times sum_{j<t} L_S(W_j)."""
    risk_history = np.asarray(risk_history, dtype=float)
    if len(risk_history) < t:
        raise ValueError(f"risk history has {len(risk_history)} entries, need {t}")
    return generalization_coefficient(eta, smoothness, t, n) * float(np.sum(risk_history[:t]))


def stability_gap_bound(rho, n, sq_dists, train_risk) -> float:
    """Gap bound from on-average stability: rho/(2n) sum d^2 + sqrt(2 rho L_S sum d^2 / n)."""
    s = float(np.sum(np.asarray(sq_dists, dtype=float)))
    return rho / (2 * n) * s + math.sqrt(2 * rho * max(train_risk, 0.0) * s / n)


def excess_risk_bound(arch, eta, t_max, n, m, c, pop_risk_min, approx_error) -> float:
    """Order expression with unit constants (not a certified bound)."""
    eta_t = eta * t_max
    if arch == "two_layer":
        coef = eta_t * m ** (1 - 2 * c) / n
    elif arch == "three_layer":
        coef = eta_t / n
    else:
        raise ConfigError(f"unknown arch {arch!r}")
    return coef * pop_risk_min + approx_error


def approx_error_surrogate(wstar_dist, eta, t_max) -> float:
    """||W* - W0||^2 / (2 eta T)."""
    return wstar_dist ** 2 / (2 * eta * t_max)


# ----------------------------------------------------------------------------
# width conditions

@dataclass(frozen=True)
class WidthConditionReport:
    condition_id: str
    required_m: float
    actual_m: int
    satisfied: bool
    term_breakdown: tuple
    heuristic: bool

    def to_dict(self):
        return {"condition_id": self.condition_id, "required_m": self.required_m,
                "actual_m": self.actual_m, "satisfied": self.satisfied,
                "heuristic": self.heuristic,
                "terms": [{"name": k, "value": v} for k, v in self.term_breakdown]}


def _report(cid, terms, m, heuristic):
    req = float(sum(v for _, v in terms))
    return WidthConditionReport(cid, req, int(m), bool(m >= req), tuple(terms), heuristic)


def width_two_layer_stability(eta, t_max, n, c, m, c_x, act, c0, rho) -> WidthConditionReport:
    """Stability width condition with its explicit constants."""
    C1, C2, C3 = width_constants_two_layer(c_x, act, c, c0)
    et = eta * t_max
    x = et ** 2 * (1 + eta * rho) * math.sqrt(rho * (rho * et + 2)) / n
    terms = [("C1*(...)^(2/(4c-1))", C1 * x ** (2 / (4 * c - 1))),
             ("C2*(eta T)^(3/(4c-1))", C2 * et ** (3 / (4 * c - 1))),
             ("C3*(eta T)^(1/c)", C3 * et ** (1 / c))]
    return _report("two_layer_stability", terms, m, False)


def width_two_layer_risk(eta, t_max, n, c, m, rho, btilde, wstar_dist) -> WidthConditionReport:
    et = eta * t_max
    inner = (E ** 2 * eta ** 3 * rho ** 2 * t_max ** 2 / n ** 2 + E * eta ** 2 * t_max * rho / n + 1)
    v = (btilde * t_max * (math.sqrt(et) + wstar_dist) * inner) ** (1 / c)
    return _report("two_layer_risk", [("(b~ T (sqrt(eta T)+||W*-W0||)(...))^(1/c)", v)], m, True)


def width_three_layer_stability(eta, t_max, n, c, m, w0_norm) -> WidthConditionReport:
    if c <= 0.5:
        raise ConfigError("three-layer width conditions require c > 1/2")
    et = eta * t_max
    bt = math.sqrt(et) + w0_norm
    terms = [
        ("(eta T)^4", et ** 4),
        ("(eta T)^(1/(4c-2))", et ** (1 / (4 * c - 2))),
        ("||W0||^(4/(8c-3))", w0_norm ** (4 / (8 * c - 3))),
        ("||W0||^(1/(6c-3))", w0_norm ** (1 / (6 * c - 3))),
        ("T1^(1/(5c-1/2))", ((et * bt) ** 2 + et ** 3.5 * bt / n) ** (1 / (5 * c - 0.5))),
        ("T2^(1/(4c-1))", (et ** 1.5 * bt ** 2 + et ** 3 * bt / n) ** (1 / (4 * c - 1))),
        ("T3^(1/(5c-1))", (et ** 2 * bt + et ** 3.5 / n) ** (1 / (5 * c - 1))),
        ("T4^(1/(4c-3/2))", (et ** 1.5 * bt + et ** 3 / n) ** (1 / (4 * c - 1.5))),
    ]
    return _report("three_layer_stability", terms, m, True)


def width_three_layer_risk(eta, t_max, n, c, m, w0_norm, wstar_norm) -> WidthConditionReport:
    if c <= 0.5:
        raise ConfigError("three-layer width conditions require c > 1/2")
    et = eta * t_max
    ctn = et + eta ** 3 * t_max ** 2 / n ** 2
    R = math.sqrt(et) + w0_norm + wstar_norm
    terms = [
        ("(C R^4)^(1/(5c-1/2))", (ctn * R ** 4) ** (1 / (5 * c - 0.5))),
        ("(C R^3)^(1/(4c-1))", (ctn * R ** 3) ** (1 / (4 * c - 1))),
        ("(C R^2)^(1/(4c-3/2))", (ctn * R ** 2) ** (1 / (4 * c - 1.5))),
        ("(C R)^(1/(2c-1/2))", (ctn * R) ** (1 / (2 * c - 0.5))),
    ]
    return _report("three_layer_risk", terms, m, True)


def width_conditions(arch, eta, t_max, n, c, m, c_x, c_y, act, c0, w0_norm, wstar_dist,
                     wstar_norm=None):
    """All width conditions relevant to an architecture."""
    if arch == "two_layer":
        rho = rho_two_layer(c_x, c_y, act, m, c)
        bt = b_tilde(c_x, act, m, c, c0)
        return [width_two_layer_stability(eta, t_max, n, c, m, c_x, act, c0, rho),
                width_two_layer_risk(eta, t_max, n, c, m, rho, bt, wstar_dist)]
    if arch == "three_layer":
        if c <= 0.5:
            raise ConfigError("three-layer networks require c > 1/2")
        if wstar_norm is None:
            wstar_norm = wstar_dist + w0_norm
        return [width_three_layer_stability(eta, t_max, n, c, m, w0_norm),
                width_three_layer_risk(eta, t_max, n, c, m, w0_norm, wstar_norm)]
    raise ConfigError(f"unknown arch {arch!r}")


# ----------------------------------------------------------------------------
# (c, mu) regions

PINK = "pink_infeasible"
OVER = "blue_over_necessary"
DOTTED = "blue_dotted_under_sufficient"


@dataclass(frozen=True)
class RegionVerdict:
    arch: str
    c: float
    mu: float
    region: str
    smallest_width_exponent: float  # nan in the pink region
    eta_t_window: tuple             # (low, high); high may be inf


def classify_region(arch, c, mu) -> RegionVerdict:
    if not (0.0 <= mu <= 1.0):
        raise ConfigError(f"mu must lie in [0, 1], got {mu}")
    nan = float("nan")
    if arch == "two_layer":
        if not (0.5 <= c <= 1.0):
            raise ConfigError(f"two-layer c must lie in [1/2, 1], got {c}")
        if c / 3 + mu <= 0.5 or (c < 0.75 and c + mu < 1):
            return RegionVerdict(arch, c, mu, PINK, nan, (nan, nan))
        denom = 6 * mu + 2 * c - 3
        e = 3 / (2 * denom)
        high = c / (3 - 4 * c) if c < 0.75 else math.inf
        return RegionVerdict(arch, c, mu, DOTTED if e <= 1 else OVER, e, (c / denom, high))
    if arch == "three_layer":
        if not (0.5 < c <= 1.0):
            raise ConfigError(f"three-layer c must lie in (1/2, 1], got {c}")
        if mu < 0.5:
            return RegionVerdict(arch, c, mu, PINK, nan, (nan, nan))
        if c >= 9 / 16:
            e = 2 / (8 * mu - 3)
            low = 1 / (2 * (8 * mu - 3))
        else:
            e = 1 / (2 * (2 * mu + 4 * c - 3))
            low = (2 * c - 1) / (2 * mu + 4 * c - 3)
        return RegionVerdict(arch, c, mu, DOTTED if e <= 1 else OVER, e, (low, 0.5))
    raise ConfigError(f"unknown arch {arch!r}")


def region_grid(arch, n_c=21, n_mu=21):
    """Verdicts on an n_c x n_mu grid over the admissible (c, mu) box.

    For three layers the excluded c = 1/2 column is replaced by the next grid value
    shifted inward by 1e-9.
    """
    cs = np.linspace(0.5, 1.0, n_c)
    if arch == "three_layer":
        cs = cs.copy()
        cs[0] = 0.5 + 1e-9
    mus = np.linspace(0.0, 1.0, n_mu)
    return [classify_region(arch, float(c), float(mu)) for c in cs for mu in mus]
