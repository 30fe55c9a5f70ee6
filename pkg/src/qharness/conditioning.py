"""Bridges, one-sided conditioning, Meixner bridges, gluing and the T1I construction.

Outputs follow the same scalar rules as :mod:`qharness.harness`: with
rational input, sigma/tau/gamma come back as Fractions and eta/theta as
Surds (exact ``q*sqrt(r)`` values), so squares and products can be
compared exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import InfeasibleTarget, InvalidParams, NonpositiveDenominator, NonpositiveK, NonpositiveKappaSq
from .harness import eval_K, scale_transform
from .params import AffineMap, DeltaPair, QHParams, upper_gamma_ok
from .scalar import FLOAT_TOL, Surd, is_exact, is_zero, sign, sqrt, squared


@dataclass(frozen=True)
class BridgeData:
    R: object
    V: object
    z_R: object
    z_V: object
    slope: object
    pivot: object
    denom: object
    K: object
    M: object

    @property
    def M_squared(self):
        return self.K / self.denom

    def affine_map(self) -> AffineMap:
        """Y_t = k((1+t/V) X_{(t+R)/(1+t/V)} - t z_V/V - z_R), k = sqrt(V)/((V-R)M)."""
        k = sqrt(self.V) / ((self.V - self.R) * self.M)
        return AffineMap(k, k * self.R, k / self.V, k, -k * self.z_V / self.V, -k * self.z_R)


class BridgeResult(NamedTuple):
    params: QHParams
    data: BridgeData


class Conditioned(NamedTuple):
    params: QHParams
    transform: AffineMap
    kappa_sq: object


def bridge_denominator(p: QHParams, R, V):
    return V * (1 + R * p.sigma) + p.tau - R * p.gamma


def bridge_params(p: QHParams, R, V, z_R, z_V) -> BridgeResult:
    """Parameters of the bridge of X in QH(p) pinned at X_R = z_R, X_V = z_V.

    The bridge is re-straightened to a quadratic harness on (0, inf) by the
    map in :meth:`BridgeData.affine_map`.
    """
    if not R < V:
        raise ValueError(f"need R < V, got R={R}, V={V}")
    den = bridge_denominator(p, R, V)
    if not den > 0:
        raise NonpositiveDenominator(f"V(1+R sigma)+tau-R gamma = {den} <= 0; parameters are not valid on [R, V]")
    d = DeltaPair.from_values(R, V, z_R, z_V)
    K = eval_K(p, d)
    if not K > 0:
        raise NonpositiveK(f"K(Delta_RV) = {K} <= 0")
    M = sqrt(K / den)
    D, Dt = d.slope, d.pivot
    eta, theta, sigma, tau, gamma = p.astuple()
    one_m_g = 1 - gamma
    num_eta = -theta + V * eta - 2 * tau * D + 2 * sigma * V * Dt - one_m_g * (V * D - Dt)
    num_theta = theta - R * eta + 2 * tau * D - 2 * R * sigma * Dt - one_m_g * (Dt - R * D)
    root_v = sqrt(V)
    new = QHParams(
        eta=num_eta / (root_v * M * den),
        theta=root_v * num_theta / (M * den),
        sigma=(sigma * V * V + one_m_g * V + tau) / (V * den),
        tau=V * (sigma * R * R + one_m_g * R + tau) / den,
        gamma=(V * gamma - R * (V * sigma + 1) - tau) / den,
    )
    return BridgeResult(new, BridgeData(R, V, z_R, z_V, D, Dt, den, K, M))


def future_kappa_sq(p: QHParams, V, z_V):
    """(1 + tau/V)(1 + theta z_V/V + tau z_V^2/V^2); works elementwise on arrays."""
    return (1 + p.tau / V) * (1 + p.theta * z_V / V + p.tau * z_V * z_V / (V * V))


def past_kappa_sq(p: QHParams, R, z_R):
    """(1 + R sigma)(1 + eta z_R + sigma z_R^2); works elementwise on arrays."""
    return (1 + R * p.sigma) * (1 + p.eta * z_R + p.sigma * z_R * z_R)


def condition_on_future(p: QHParams, V, z_V) -> Conditioned:
    """Condition X in QH(p) on (0, inf) on X_V = z_V and re-straighten."""
    eta, theta, sigma, tau, gamma = p.astuple()
    kappa_sq = future_kappa_sq(p, V, z_V)
    if not kappa_sq > 0:
        raise NonpositiveKappaSq(f"kappa^2 = {kappa_sq} <= 0")
    kappa = sqrt(kappa_sq)
    new = QHParams(
        eta=(-theta + V * eta - 2 * tau * z_V / V - (1 - gamma) * z_V) / (V * kappa),
        theta=(theta + 2 * tau * z_V / V) / kappa,
        sigma=(sigma * V * V + (1 - gamma) * V + tau) / (V * (V + tau)),
        tau=V * tau / (V + tau),
        gamma=(V * gamma - tau) / (V + tau),
    )
    k = (1 + tau / V) / kappa
    # Y_t = k((1 + t/V) X_{t/(1+t/V)} - t z_V / V)
    transform = AffineMap(k, 0 * k, k / V, k, -k * z_V / V, 0 * k)
    return Conditioned(new, transform, kappa_sq)


def condition_on_past(p: QHParams, R, z_R) -> Conditioned:
    """Condition X in QH(p) on (0, inf) on X_R = z_R and restart at R."""
    eta, theta, sigma, tau, gamma = p.astuple()
    kappa_sq = past_kappa_sq(p, R, z_R)
    if not kappa_sq > 0:
        raise NonpositiveKappaSq(f"kappa^2 = {kappa_sq} <= 0")
    kappa = sqrt(kappa_sq)
    one_p = 1 + R * sigma
    new = QHParams(
        eta=(eta + 2 * sigma * z_R) / kappa,
        theta=(theta - R * eta - 2 * R * sigma * z_R - (1 - gamma) * z_R) / kappa,
        sigma=sigma / one_p,
        tau=(sigma * R * R + (1 - gamma) * R + tau) / one_p,
        gamma=(gamma - R * sigma) / one_p,
    )
    k = one_p / kappa
    # Y_t = k (X_{t+R} - z_R)
    transform = AffineMap(k, k * R, 0 * k, k, 0 * k, -k * z_R)
    return Conditioned(new, transform, kappa_sq)


def meixner_bridge(theta, tau, R, V, slope) -> QHParams:
    """Bridge of the Meixner process QH(0, theta; 0, tau; 1) over [R, V], rescaled.

    ``slope`` is (z_V - z_R)/(V - R).
    """
    if tau < 0:
        raise InvalidParams(f"tau = {tau} must be non-negative")
    if not R < V:
        raise ValueError(f"need R < V, got R={R}, V={V}")
    K = 1 + theta * slope + tau * slope * slope
    if not K > 0:
        raise NonpositiveK(f"1 + theta*D + tau*D^2 = {K} <= 0")
    span = V - R
    st = tau / (span + tau)
    theta_y = (theta + 2 * tau * slope) / (sqrt(span + tau) * sqrt(K))
    return QHParams(-theta_y, theta_y, st, st, (span - tau) / (span + tau))


def bridge_invariant(p: QHParams):
    """((1-gamma)^2 - 4 sigma tau)/(1+gamma)^2, or None when gamma = -1."""
    g1 = 1 + p.gamma
    if is_zero(g1):
        return None
    return ((1 - p.gamma) ** 2 - 4 * p.sigma * p.tau) / (g1 * g1)


# --------------------------------------------------------------------------
# Gluing classification

WIENER = "Wiener"
BIPOISSON = "BiPoisson"
UPPER_BOUNDARY = "UpperBoundary"
INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class GlueVerdict:
    case: str
    V: object = None
    derived_params: Optional[QHParams] = None
    theta_sign: Optional[int] = None  # sign of theta^2 - 4 tau, upper-boundary case only

    def to_json(self):
        from .scalar import to_jsonable

        return {
            "case": self.case,
            "V": to_jsonable(self.V) if self.V is not None else None,
            "derived_params": self.derived_params.to_json() if self.derived_params else None,
            "theta_sign": self.theta_sign,
        }


def _weighted_equal(x, wx, y, wy):
    """x sqrt(wx) == y sqrt(wy) for non-negative weights."""
    if all(is_exact(v) for v in (x, wx, y, wy)):
        return sign(x) * sign(wx) == sign(y) * sign(wy) and squared(x) * wx == squared(y) * wy
    return abs(float(x) * math.sqrt(float(wx)) - float(y) * math.sqrt(float(wy))) <= FLOAT_TOL


def glue_classify(p: QHParams) -> GlueVerdict:
    """Which harnesses on (0, inf) split at some V into conditioned q-Meixner pieces."""
    eta, theta, sigma, tau, gamma = p.astuple()
    if sigma < 0 and not is_zero(sigma) or tau < 0 and not is_zero(tau):
        raise InvalidParams("glue_classify needs sigma, tau >= 0")
    if not upper_gamma_ok(gamma, sigma, tau):
        raise InvalidParams("glue_classify needs gamma <= 1 + 2 sqrt(sigma tau)")

    if is_zero(gamma - 1) and is_zero(sigma) and is_zero(tau):
        if is_zero(eta) and is_zero(theta):
            return GlueVerdict(WIENER)
        if eta * theta > 0 and not is_zero(eta * theta):
            V = theta / eta
            return GlueVerdict(BIPOISSON, V, condition_on_future(p, V, 0 * V).params)
        return GlueVerdict(INFEASIBLE)

    g1 = gamma - 1
    on_boundary = (
        g1 > 0
        and not is_zero(sigma)
        and not is_zero(tau)
        and (squared(g1) == 4 * sigma * tau if is_exact(g1) and is_exact(sigma) and is_exact(tau)
             else abs(float(g1) - 2 * math.sqrt(float(sigma) * float(tau))) <= FLOAT_TOL)
    )
    if on_boundary and _weighted_equal(eta, tau, theta, sigma):
        V = sqrt(tau / sigma)
        derived = None if isinstance(V, Surd) else condition_on_future(p, V, 0 * V).params
        return GlueVerdict(UPPER_BOUNDARY, V, derived, sign(theta * theta - 4 * tau))
    return GlueVerdict(INFEASIBLE)


# --------------------------------------------------------------------------
# Construction behind the boundary case gamma = 1 - 2 sqrt(sigma tau)


@dataclass(frozen=True)
class T1ISolution:
    """Meixner bridge data whose rescaling has the requested parameters."""

    theta_Z: float
    tau_Z: float
    span: float
    slope: float
    scale: float

    def forward(self) -> QHParams:
        return scale_transform(meixner_bridge(self.theta_Z, self.tau_Z, 0.0, self.span, self.slope), self.scale)


def solve_T1I(eta, theta, sigma, tau) -> T1ISolution:
    """Find a Meixner bridge realizing QH(eta, theta; sigma, tau; 1 - 2 sqrt(sigma tau)).

    Requires sigma, tau > 0, sigma*tau < 1 and sqrt(tau)*eta + sqrt(sigma)*theta = 0.
    Works in floating point (the scale involves a fourth root).
    """
    eta, theta, sigma, tau = (float(x) for x in (eta, theta, sigma, tau))
    if not (sigma > 0 and tau > 0 and sigma * tau < 1):
        raise InfeasibleTarget("need sigma, tau > 0 and sigma*tau < 1")
    if abs(math.sqrt(tau) * eta + math.sqrt(sigma) * theta) > FLOAT_TOL * max(1.0, abs(eta), abs(theta)):
        raise InfeasibleTarget("need sqrt(tau)*eta + sqrt(sigma)*theta = 0")
    s = math.sqrt(sigma * tau)
    span = 1.0 / s - 1.0  # tau_Z/(span + tau_Z) = s with tau_Z = 1
    a = (tau / sigma) ** 0.25
    if theta < 0:
        a = -a
    theta_x = theta / a  # >= 0 by the choice of sign
    # with slope 1 the bridge gives theta_x^2 = s (theta_Z + 2) and K = theta_Z + 2
    k = theta_x * theta_x / s
    if k >= 0.5:
        return T1ISolution(k - 2.0, 1.0, span, 1.0, a)
    # near theta = 0 that K degenerates; slope 0 keeps K = 1 and theta_x = theta_Z sqrt(s)
    return T1ISolution(theta_x / math.sqrt(s), 1.0, span, 0.0, a)
