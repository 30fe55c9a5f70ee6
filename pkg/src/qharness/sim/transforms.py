"""Pathwise space-time transforms of ensembles.

Every transform here has the shape

    Y_t = k * ((c t + d) X_{phi(t)} + n1 t + n2),   phi(t) = (a t + b)/(c t + d),

with a fixed Mobius part (a, b, c, d).  For the deterministic maps k, n1, n2
are numbers; for bridges and one-sided conditioning they may be read off
each path (its values at R and V), which makes them per-path arrays.

Sampling must happen on the preimage grid: :func:`source_grid` lists the
source times a transform needs for a given target grid, and
:func:`transform_paths` refuses ensembles that do not contain them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Optional

import numpy as np

from ..conditioning import bridge_denominator, future_kappa_sq, past_kappa_sq
from ..errors import GridMismatch, InvalidDescriptor, NonpositiveDenominator, NonpositiveK, NonpositiveKappaSq
from ..harness import eval_K, harness_to_qh, standardizing_map
from ..params import AffineMap, DeltaPair, QHParams
from .processes import PathEnsemble, ProcessDescriptor, descriptor_from_json

GRID_TOL = 1e-14
_MATCH_TOL = 1e-12


class PathTransform:
    kind: ClassVar[str] = ""

    def mobius_part(self):
        """(a, b, c, d) of the time change, as floats."""
        raise NotImplementedError

    def required_times(self):
        """Source times read for path-dependent coefficients."""
        return ()

    def coefficients(self, lookup):
        """(k, n1, n2), scalars or per-path arrays; ``lookup(t)`` returns the column at t."""
        raise NotImplementedError

    def source_time(self, t):
        a, b, c, d = self.mobius_part()
        den = c * t + d
        if den == 0:
            raise GridMismatch(f"target time {t} is a pole of the time change")
        return (a * t + b) / den

    def target_time(self, x):
        """Inverse of :meth:`source_time`."""
        a, b, c, d = self.mobius_part()
        den = a - c * x
        if den == 0:
            return math.inf
        return (d * x - b) / den

    def to_json(self):
        out = {"kind": self.kind}
        for k, v in self.__dict__.items():
            out[k] = v.to_json() if hasattr(v, "to_json") else v
        return out


def _f(x):
    return float(x)


@dataclass(frozen=True)
class AffineTransform(PathTransform):
    """Y_t = (c t + d) X_{phi(t)} + m1 t + m2 for an AffineMap."""

    kind: ClassVar[str] = "affine"
    map: AffineMap

    def mobius_part(self):
        f = self.map
        return (_f(f.a), _f(f.b), _f(f.c), _f(f.d))

    def coefficients(self, lookup):
        return 1.0, _f(self.map.m1), _f(self.map.m2)

    @classmethod
    def identity(cls):
        return cls(AffineMap.identity())


@dataclass(frozen=True)
class StandardizingTransform(AffineTransform):
    """Standardize a harness with covariance (a s + b)(c t + d) and mean alpha + beta t."""

    kind: ClassVar[str] = "thm11"
    cov_product: tuple = (1.0, 0.0, 0.0, 1.0)
    alpha: float = 0.0
    beta: float = 0.0

    @classmethod
    def build(cls, cov_product, alpha=0.0, beta=0.0):
        from ..params import MeanLine

        prod = tuple(float(x) for x in cov_product)
        return cls(standardizing_map(MeanLine(float(beta), float(alpha)), prod), prod, float(alpha), float(beta))

    def to_json(self):
        return {"kind": self.kind, "cov_product": list(self.cov_product), "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class DirichletTransform(AffineTransform):
    """Y_t = sqrt(c + 1/V) ((V + t) X_{tV/(V+t)} - t)."""

    kind: ClassVar[str] = "dirichlet"
    c: float = 1.0
    V: float = 1.0

    @classmethod
    def build(cls, c, V):
        k = math.sqrt(c + 1.0 / V)
        return cls(AffineMap(k * V, 0.0, k, k * V, -k, 0.0), float(c), float(V))

    def to_json(self):
        return {"kind": self.kind, "c": self.c, "V": self.V}


@dataclass(frozen=True)
class BinomialTransform(AffineTransform):
    """Y_t = ((V + t) X_{tV/(V+t)} - t N)/sqrt(V N)."""

    kind: ClassVar[str] = "binomial"
    N: int = 1
    V: float = 1.0

    @classmethod
    def build(cls, N, V):
        k = 1.0 / math.sqrt(V * N)
        return cls(AffineMap(k * V, 0.0, k, k * V, -k * N, 0.0), int(N), float(V))

    def to_json(self):
        return {"kind": self.kind, "N": self.N, "V": self.V}


def _endpoint(value, t, lookup):
    return lookup(t) if value is None else float(value)


def _first_bad(mask):
    bad = np.nonzero(mask)[0]
    return int(bad[0]) if bad.size else None


@dataclass(frozen=True)
class BridgeTransform(PathTransform):
    """Re-straighten the bridge over [R, V] to a harness on (0, inf).

    Y_t = (sqrt(V)/((V-R) M)) ((1 + t/V) X_{(t+R)/(1+t/V)} - t z_V/V - z_R).
    Endpoint values left as None are read from each path, and M is then
    computed per path as sqrt(K(Delta_RV)/denom) under ``params``.
    """

    kind: ClassVar[str] = "bridge"
    R: float
    V: float
    params: Optional[QHParams] = None
    z_R: Optional[float] = None
    z_V: Optional[float] = None
    M: Optional[float] = None

    def __post_init__(self):
        if not self.R < self.V:
            raise InvalidDescriptor(f"bridge needs R < V, got R={self.R}, V={self.V}")
        if self.M is None and self.params is None:
            raise InvalidDescriptor("bridge needs either a fixed M or params to compute it")

    def mobius_part(self):
        return (1.0, float(self.R), 1.0 / self.V, 1.0)

    def required_times(self):
        return tuple(t for t, z in ((self.R, self.z_R), (self.V, self.z_V)) if z is None and t > 0)

    def coefficients(self, lookup):
        R, V = float(self.R), float(self.V)
        z_R = 0.0 if self.z_R is None and R == 0 else _endpoint(self.z_R, R, lookup)
        z_V = _endpoint(self.z_V, V, lookup)
        if self.M is not None:
            M = float(self.M)
        else:
            p = self.params.to_float()
            den = bridge_denominator(p, R, V)
            if not den > 0:
                raise NonpositiveDenominator(f"V(1+R sigma)+tau-R gamma = {den} <= 0")
            K = np.asarray(eval_K(p, DeltaPair.from_values(R, V, z_R, z_V)), dtype=np.float64)
            i = _first_bad(np.atleast_1d(K <= 0))
            if i is not None:
                raise NonpositiveK(f"K(Delta_RV) <= 0 on path {i}", path_index=i)
            M = np.sqrt(K / den)
        k = math.sqrt(V) / ((V - R) * M)
        return k, -z_V / V, -z_R


@dataclass(frozen=True)
class FutureTransform(PathTransform):
    """Y_t = ((1 + tau/V)/kappa)((1 + t/V) X_{t/(1+t/V)} - t z_V/V)."""

    kind: ClassVar[str] = "future"
    V: float
    params: QHParams
    z_V: Optional[float] = None

    def mobius_part(self):
        return (1.0, 0.0, 1.0 / self.V, 1.0)

    def required_times(self):
        return (self.V,) if self.z_V is None else ()

    def coefficients(self, lookup):
        p, V = self.params.to_float(), float(self.V)
        z_V = _endpoint(self.z_V, V, lookup)
        ksq = np.asarray(future_kappa_sq(p, V, z_V), dtype=np.float64)
        i = _first_bad(np.atleast_1d(ksq <= 0))
        if i is not None:
            raise NonpositiveKappaSq(f"kappa^2 <= 0 on path {i}")
        k = (1.0 + p.tau / V) / np.sqrt(ksq)
        return k, -z_V / V, 0.0


@dataclass(frozen=True)
class PastTransform(PathTransform):
    """Y_t = (1 + R sigma)(X_{t+R} - z_R)/kappa."""

    kind: ClassVar[str] = "past"
    R: float
    params: QHParams
    z_R: Optional[float] = None

    def mobius_part(self):
        return (1.0, float(self.R), 0.0, 1.0)

    def required_times(self):
        return (self.R,) if self.z_R is None else ()

    def coefficients(self, lookup):
        p, R = self.params.to_float(), float(self.R)
        z_R = _endpoint(self.z_R, R, lookup)
        ksq = np.asarray(past_kappa_sq(p, R, z_R), dtype=np.float64)
        i = _first_bad(np.atleast_1d(ksq <= 0))
        if i is not None:
            raise NonpositiveKappaSq(f"kappa^2 <= 0 on path {i}")
        k = (1.0 + R * p.sigma) / np.sqrt(ksq)
        return k, 0.0, -z_R


def source_grid(transform: PathTransform, targets) -> np.ndarray:
    """Sorted source times needed to produce ``targets``; near-duplicates merged at 1e-14."""
    pts = sorted([transform.source_time(float(t)) for t in targets] + [float(t) for t in transform.required_times()])
    out = []
    for x in pts:
        if out and abs(x - out[-1]) <= GRID_TOL * max(1.0, abs(x)):
            continue
        out.append(x)
    return np.asarray(out)


def transform_paths(e: PathEnsemble, transform: PathTransform, targets=None) -> PathEnsemble:
    """Apply ``transform`` to every path of ``e`` on the target grid.

    Without ``targets``, every source time except the transform's own
    endpoint times is mapped back to its target time.
    """
    if targets is None:
        req = transform.required_times()
        keep = [x for x in e.times if not any(abs(x - r) <= _MATCH_TOL * max(1.0, abs(r)) for r in req)]
        targets = sorted(transform.target_time(float(x)) for x in keep)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim != 1 or targets.size == 0 or np.any(np.diff(targets) <= 0):
        raise GridMismatch("target grid must be non-empty and strictly increasing")

    def lookup(t):
        j = e.column(t, _MATCH_TOL)
        if j is None:
            raise GridMismatch(f"source time {t!r} is missing; sample on source_grid(transform, targets)")
        return e.values[:, j]

    k, n1, n2 = transform.coefficients(lookup)
    _, _, c, d = transform.mobius_part()
    cols = []
    for t in targets:
        x = lookup(transform.source_time(t))
        cols.append(k * ((c * t + d) * x + n1 * t + n2))
    values = np.column_stack([np.broadcast_to(col, (e.n_paths,)) for col in cols])
    return PathEnsemble(targets, values, e.seed, Transformed(e.descriptor, transform) if e.descriptor else None, e.weights)


@dataclass(frozen=True)
class Transformed(ProcessDescriptor):
    """The process obtained by applying ``transform`` to ``base``."""

    kind: ClassVar[str] = "transformed"
    base: ProcessDescriptor
    transform: PathTransform

    def check_grid(self, times):
        self.base.check_grid(source_grid(self.transform, times))

    def _sample(self, times, seed, paths):
        src_times = source_grid(self.transform, times)
        src = PathEnsemble(src_times, self.base._sample(src_times, seed, paths))
        try:
            return transform_paths(src, self.transform, times).values
        except NonpositiveK as exc:
            i = int(paths[exc.path_index]) if exc.path_index is not None else None
            raise NonpositiveK(f"K(Delta_RV) <= 0 on path {i}", path_index=i) from None

    def to_json(self):
        return {"kind": self.kind, "base": self.base.to_json(), "transform": self.transform.to_json()}

    @classmethod
    def from_json(cls, obj):
        return cls(descriptor_from_json(obj["base"]), transform_from_json(obj["transform"]))


def transform_from_json(obj) -> PathTransform:
    kind = obj.get("kind")
    num = lambda k, default=None: None if obj.get(k, default) is None else float(obj.get(k, default))  # noqa: E731
    params = QHParams.from_json(obj["params"]) if "params" in obj and obj["params"] is not None else None
    if kind == "affine":
        return AffineTransform(AffineMap.from_json(obj["map"] if "map" in obj else obj))
    if kind == "thm11":
        return StandardizingTransform.build(obj["cov_product"], num("alpha", 0.0), num("beta", 0.0))
    if kind == "dirichlet":
        return DirichletTransform.build(num("c"), num("V"))
    if kind == "binomial":
        return BinomialTransform.build(int(obj["N"]), num("V"))
    if kind == "bridge":
        return BridgeTransform(num("R"), num("V"), params, num("z_R"), num("z_V"), num("M"))
    if kind == "future":
        return FutureTransform(num("V"), params, num("z_V"))
    if kind == "past":
        return PastTransform(num("R"), params, num("z_R"))
    raise InvalidDescriptor(f"unknown transform kind {kind!r}")


@dataclass(frozen=True)
class Standardization:
    transform: PathTransform
    params: QHParams
    interval: tuple


def standardize(d: ProcessDescriptor) -> Standardization:
    """Standardizing path transform of ``d`` and the parameters it predicts."""
    h = d.harness()
    sf = harness_to_qh(h.mean, h.cov_product, h.var_form, h.interval)
    t = StandardizingTransform.build(h.cov_product, h.mean.intercept, h.mean.slope)
    return Standardization(t, sf.params.to_float(), tuple(float(x) for x in sf.interval))


def dirichlet_prediction(c, V) -> QHParams:
    """Parameters of DirichletTransform applied to DirichletBridge(c, V)."""
    r = math.sqrt(1.0 + c * V)
    sv = math.sqrt(V)
    return QHParams(-2.0 / (sv * r), 2.0 * sv / r, 1.0 / (V * (1.0 + c * V)), V / (1.0 + c * V), 1.0 - 2.0 / (1.0 + c * V))


def binomial_prediction(N, V) -> QHParams:
    """Parameters of BinomialTransform applied to BinomialBridge(N, V)."""
    return QHParams(-1.0 / math.sqrt(V * N), math.sqrt(V / N), 0.0, 0.0, 1.0)
