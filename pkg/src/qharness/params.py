"""Value types of the harness calculus and their JSON encodings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import linalg as la
from .errors import InvalidParams, SingularMap
from .scalar import INF, is_exact, parse_scalar, sign, squared, to_jsonable

# Floats may fall short of a boundary by this much without being rejected.
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class QHParams:
    """Parameters (eta, theta; sigma, tau; gamma) of a standardized quadratic harness.

    ``eta`` and ``theta`` may be Surds when computed exactly; everything else
    is a float or a Fraction.
    """

    eta: object
    theta: object
    sigma: object
    tau: object
    gamma: object
    standard_infinite_horizon: bool = False

    def __post_init__(self):
        if _below(self.gamma, -1):
            raise InvalidParams(f"gamma={self.gamma} < -1")
        if self.standard_infinite_horizon:
            if _below(self.sigma, 0) or _below(self.tau, 0):
                raise InvalidParams("sigma and tau must be non-negative on (0, inf)")
            if not upper_gamma_ok(self.gamma, self.sigma, self.tau):
                raise InvalidParams(f"gamma={self.gamma} exceeds 1 + 2 sqrt(sigma tau)")

    def astuple(self):
        return (self.eta, self.theta, self.sigma, self.tau, self.gamma)

    def to_float(self):
        return QHParams(*(float(x) for x in self.astuple()), self.standard_infinite_horizon)

    def to_json(self):
        out = {k: to_jsonable(v) for k, v in zip(("eta", "theta", "sigma", "tau", "gamma"), self.astuple())}
        out["standard_infinite_horizon"] = self.standard_infinite_horizon
        return out

    @classmethod
    def from_json(cls, obj, mode="float"):
        """Missing entries default to the Wiener values (0, 0; 0, 0; 1)."""
        defaults = {"eta": 0, "theta": 0, "sigma": 0, "tau": 0, "gamma": 1}
        vals = [parse_scalar(obj.get(k, v), mode) for k, v in defaults.items()]
        return cls(*vals, bool(obj.get("standard_infinite_horizon", False)))


def _below(x, bound):
    if is_exact(x):
        return x < bound
    return float(x) < bound - _EDGE_TOL


def upper_gamma_ok(gamma, sigma, tau):
    """gamma <= 1 + 2 sqrt(sigma tau), decided exactly for rationals."""
    g1 = gamma - 1
    if is_exact(g1) and is_exact(sigma) and is_exact(tau):
        return g1 <= 0 or squared(g1) <= 4 * sigma * tau
    return float(g1) <= 2 * math.sqrt(max(float(sigma) * float(tau), 0.0)) + _EDGE_TOL


@dataclass(frozen=True)
class DeltaPair:
    """Slope/pivot pair (Delta, Delta~) of a path between two times."""

    slope: object
    pivot: object

    @classmethod
    def from_values(cls, s, u, x_s, x_u):
        return cls((x_u - x_s) / (u - s), (u * x_s - s * x_u) / (u - s))

    def vector(self):
        return (self.slope, self.pivot)


@dataclass(frozen=True)
class MeanLine:
    """E X_t = slope * t + intercept, i.e. <(t, 1), (slope, intercept)>."""

    slope: object = 0
    intercept: object = 0

    def vector(self):
        return (self.slope, self.intercept)

    def at(self, t):
        return self.slope * t + self.intercept


@dataclass(frozen=True)
class CovMatrix:
    """Cov(X_s, X_t) = <(s,1), [[c0, c1], [c2, c3]] (t,1)> for s <= t."""

    c0: object
    c1: object
    c2: object
    c3: object

    @classmethod
    def from_product(cls, a, b, c, d):
        """Covariance (a s + b)(c t + d) for s < t."""
        return cls(a * c, a * d, b * c, b * d)

    @classmethod
    def standard(cls):
        return cls(0, 1, 0, 0)

    def matrix(self):
        return ((self.c0, self.c1), (self.c2, self.c3))

    @property
    def nondegenerate(self):
        return self.c1 > self.c2

    def covariance(self, s, t):
        if s > t:
            s, t = t, s
        return la.quad(la.tvec(s), self.matrix(), la.tvec(t))


@dataclass(frozen=True)
class VarianceForm:
    """K(D) = chi + theta*D + eta*D~ + tau*D^2 + (g12+g21)*D*D~ + sigma*D~^2.

    The linear pair is ordered (theta, eta) to match (Delta, Delta~) and the
    quadratic part is Gamma = [[tau, g12], [g21, sigma]].
    """

    chi: object
    theta: object
    eta: object
    tau: object
    g12: object
    g21: object
    sigma: object

    @classmethod
    def from_qh(cls, p: QHParams):
        return cls(1, p.theta, p.eta, p.tau, -1, p.gamma, p.sigma)

    @classmethod
    def from_rho(cls, chi, theta, eta, tau, rho, sigma):
        """Symmetric split of the full cross coefficient rho."""
        half = Fraction(rho, 2) if isinstance(rho, int) else rho / 2
        return cls(chi, theta, eta, tau, half, rho - half, sigma)

    @property
    def rho(self):
        return self.g12 + self.g21

    def lin(self):
        return (self.theta, self.eta)

    def gamma_matrix(self):
        return ((self.tau, self.g12), (self.g21, self.sigma))

    def __call__(self, d):
        v = d.vector() if isinstance(d, DeltaPair) else tuple(d)
        return self.chi + la.dot(self.lin(), v) + la.quad(v, self.gamma_matrix(), v)

    def with_gamma(self, g):
        return replace(self, tau=g[0][0], g12=g[0][1], g21=g[1][0], sigma=g[1][1])

    def scaled(self, k):
        return VarianceForm(*(k * x for x in (self.chi, self.theta, self.eta, self.tau, self.g12, self.g21, self.sigma)))


@dataclass(frozen=True)
class HarnessSpec:
    """Mean, covariance and conditional-variance form of a harness on an interval."""

    mean: MeanLine
    cov: CovMatrix
    var_form: VarianceForm
    interval: tuple = (0, INF)

    @classmethod
    def standard(cls, p: QHParams, interval=(0, INF)):
        return cls(MeanLine(0, 0), CovMatrix.standard(), VarianceForm.from_qh(p), tuple(interval))

    def consistency_residual(self):
        """chi + <theta, mu> + <mu, Gamma mu> + tr(Gamma Sigma^T); zero when normalized."""
        vf = self.var_form
        mu = self.mean.vector()
        g = vf.gamma_matrix()
        sig_t = la.transpose(self.cov.matrix())
        return vf.chi + la.dot(vf.lin(), mu) + la.quad(mu, g, mu) + la.trace(la.matmul(g, sig_t))

    def to_json(self):
        vf = self.var_form
        return {
            "eta": to_jsonable(vf.eta),
            "theta": to_jsonable(vf.theta),
            "sigma": to_jsonable(vf.sigma),
            "tau": to_jsonable(vf.tau),
            "chi": to_jsonable(vf.chi),
            "rho": to_jsonable(vf.rho),
            "g12": to_jsonable(vf.g12),
            "g21": to_jsonable(vf.g21),
            "mean": {"slope": to_jsonable(self.mean.slope), "intercept": to_jsonable(self.mean.intercept)},
            "cov": {k: to_jsonable(getattr(self.cov, k)) for k in ("c0", "c1", "c2", "c3")},
            "interval": [to_jsonable(x) for x in self.interval],
        }

    @classmethod
    def from_json(cls, obj, mode="float"):
        """Read a spec; ``rho`` defaults to ``gamma - 1`` and ``chi`` to 1.

        Without an explicit ``g12``/``g21`` split the cross coefficient is split
        so that the consistency identity holds (or symmetrically if the
        covariance is degenerate).
        """
        from .harness import normalize_gamma  # local: harness imports params

        num = lambda k, default=0: parse_scalar(obj.get(k, default), mode)  # noqa: E731
        if "rho" in obj:
            rho = num("rho")
        elif "gamma" in obj:
            rho = num("gamma") - 1
        else:
            rho = num("rho")
        mean = obj.get("mean", {})
        cov = obj.get("cov", {"c0": 0, "c1": 1, "c2": 0, "c3": 0})
        mean = MeanLine(parse_scalar(mean.get("slope", 0), mode), parse_scalar(mean.get("intercept", 0), mode))
        cov = CovMatrix(*(parse_scalar(cov[k], mode) for k in ("c0", "c1", "c2", "c3")))
        interval = tuple(parse_scalar(x, mode) for x in obj.get("interval", [0, "inf"]))
        explicit = "g12" in obj and "g21" in obj
        if explicit:
            vf = VarianceForm(num("chi", 1), num("theta"), num("eta"), num("tau"), num("g12"), num("g21"), num("sigma"))
        else:
            vf = VarianceForm.from_rho(num("chi", 1), num("theta"), num("eta"), num("tau"), rho, num("sigma"))
        spec = cls(mean, cov, vf, interval)
        if not explicit and cov.c1 != cov.c2:
            spec = normalize_gamma(spec)
        return spec


@dataclass(frozen=True)
class AffineMap:
    """f(x, y) = [x, y] A + [m1, m2] with A = [[a, b], [c, d]].

    Acting on a process it gives Y_t = (c t + d) X_{phi(t)} + m1 t + m2 where
    phi(t) = (a t + b) / (c t + d) is the associated Mobius map.
    """

    a: object
    b: object
    c: object
    d: object
    m1: object = 0
    m2: object = 0

    def __post_init__(self):
        if self.det == 0:
            raise SingularMap(f"singular matrix [[{self.a}, {self.b}], [{self.c}, {self.d}]]")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1, 0, 0)

    @classmethod
    def from_matrix(cls, m, shift=(0, 0)):
        return cls(m[0][0], m[0][1], m[1][0], m[1][1], shift[0], shift[1])

    @property
    def matrix(self):
        return ((self.a, self.b), (self.c, self.d))

    @property
    def shift(self):
        return (self.m1, self.m2)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def mobius(self, t):
        return mobius(self.matrix, t)

    def space_factor(self, t):
        return self.c * t + self.d

    def then(self, g: "AffineMap") -> "AffineMap":
        """The composite g o f, so that (X^f)^g = X^(g o f)."""
        a_f, a_g = self.matrix, g.matrix
        m = la.vadd(la.matvec(la.transpose(a_g), self.shift), g.shift)
        return AffineMap.from_matrix(la.matmul(a_f, a_g), m)

    def inverse(self) -> "AffineMap":
        a_inv = la.inv2(self.matrix)
        m = la.vscale(-1, la.matvec(la.transpose(a_inv), self.shift))
        return AffineMap.from_matrix(a_inv, m)

    def to_json(self):
        return {k: to_jsonable(getattr(self, k)) for k in ("a", "b", "c", "d", "m1", "m2")}

    @classmethod
    def from_json(cls, obj, mode="float"):
        return cls(*(parse_scalar(obj.get(k, 0), mode) for k in ("a", "b", "c", "d", "m1", "m2")))


def compose(g: AffineMap, f: AffineMap) -> AffineMap:
    """g o f (apply f first)."""
    return f.then(g)


def mobius(m, t):
    """(a t + b)/(c t + d), extended to t = +-inf and to poles (returns +-inf)."""
    (a, b), (c, d) = m
    if isinstance(t, float) and math.isinf(t):
        if c == 0:
            s = sign(a) * sign(d) * (1 if t > 0 else -1)
            return INF if s > 0 else -INF
        return a / c
    num = a * t + b
    den = c * t + d
    if den == 0:
        if num == 0:
            raise SingularMap("0/0 in Mobius map")
        return INF if sign(num) > 0 else -INF
    return num / den
