"""Process descriptors, forward samplers and the PathEnsemble container.

Every sampler walks the grid forward using the exact transition law of
its process and draws variates by inverse CDF from the counter-based
uniforms in :mod:`qharness.sim.rng`.  Slot 0 of a path's stream is the
random factor xi (when the process has one) and slot ``j + 1`` drives
the step into grid point ``j``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import ClassVar, NamedTuple, Optional

import numpy as np
from scipy import special, stats

from ..errors import DomainViolation, InvalidDescriptor
from ..params import MeanLine, VarianceForm
from ..scalar import INF
from .rng import uniforms

CHUNK = 8192


class ProcessHarness(NamedTuple):
    """Mean line, covariance (a s + b)(c t + d) for s < t, variance form and domain."""

    mean: MeanLine
    cov_product: tuple
    var_form: VarianceForm
    interval: tuple


def _vf(chi=0.0, theta=0.0, tau=0.0):
    return VarianceForm.from_rho(chi, theta, 0.0, tau, 0.0, 0.0)


@dataclass(frozen=True)
class MixLaw:
    """Finite discrete law of xi."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        p = tuple(float(x) for x in self.probs)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)
        if not v or len(v) != len(p):
            raise InvalidDescriptor("MixLaw needs equally many values and probabilities")
        if any(not math.isfinite(x) for x in v) or any(x < 0 or not math.isfinite(x) for x in p):
            raise InvalidDescriptor("MixLaw values must be finite and probabilities non-negative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise InvalidDescriptor(f"MixLaw probabilities sum to {math.fsum(p)}, not 1")

    @classmethod
    def rademacher(cls):
        return cls((-1.0, 1.0), (0.5, 0.5))

    @property
    def mean(self):
        return math.fsum(x * p for x, p in zip(self.values, self.probs))

    @property
    def second_moment(self):
        return math.fsum(x * x * p for x, p in zip(self.values, self.probs))

    @property
    def variance(self):
        return self.second_moment - self.mean**2

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Generalized inverse: the smallest value whose CDF reaches u."""
        cdf = np.cumsum(self.probs)
        idx = np.searchsorted(cdf, u, side="left")
        return np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]

    def to_json(self):
        return {"values": list(self.values), "probs": list(self.probs)}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["values"]), tuple(obj["probs"]))


class ProcessDescriptor:
    """Base class: subclasses define ``kind``, ``check_grid`` and ``_sample``."""

    kind: ClassVar[str] = ""

    def check_grid(self, times: np.ndarray) -> None:
        _check_increasing(times)
        if times[0] <= 0:
            raise DomainViolation(f"{self.kind} grid must be positive, got {times[0]}")

    def _sample(self, times: np.ndarray, seed: int, paths: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def harness(self) -> ProcessHarness:
        raise InvalidDescriptor(f"{self.kind} has no harness description")

    def to_json(self):
        out = {"kind": self.kind}
        for k, v in self.__dict__.items():
            out[k] = v.to_json() if hasattr(v, "to_json") else v
        return out


def _check_increasing(times):
    if times.ndim != 1 or times.size == 0:
        raise DomainViolation("grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(times)):
        raise DomainViolation("grid must be finite")
    if np.any(np.diff(times) <= 0):
        raise DomainViolation("grid must be strictly increasing")


def _steps(times):
    return np.diff(np.concatenate(([0.0], times)))


def _positive(name, **vals):
    for k, v in vals.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise InvalidDescriptor(f"{name}: {k} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class Wiener(ProcessDescriptor):
    kind: ClassVar[str] = "wiener"

    def _sample(self, times, seed, paths):
        return _brownian(times, seed, paths)

    def harness(self):
        return ProcessHarness(MeanLine(0.0, 0.0), (1.0, 0.0, 0.0, 1.0), _vf(chi=1.0), (0.0, INF))


def _brownian(times, seed, paths, first_slot=1):
    steps = np.sqrt(_steps(times))
    out = np.empty((paths.size, times.size))
    acc = np.zeros(paths.size)
    for j, h in enumerate(steps):
        acc = acc + h * special.ndtri(uniforms(seed, paths, first_slot + j))
        out[:, j] = acc
    return out


@dataclass(frozen=True)
class WienerDrift(ProcessDescriptor):
    """X_t = W_t + v xi t."""

    kind: ClassVar[str] = "wiener-drift"
    v: float = 1.0
    xi_law: MixLaw = field(default_factory=MixLaw.rademacher)

    def __post_init__(self):
        if not math.isfinite(self.v):
            raise InvalidDescriptor("wiener-drift: v must be finite")

    def _sample(self, times, seed, paths):
        xi = self.v * self.xi_law.quantile(uniforms(seed, paths, 0))
        return _brownian(times, seed, paths) + xi[:, None] * times[None, :]

    def harness(self):
        # Cov = s + Var(v xi) s t
        w2 = self.v**2 * self.xi_law.variance
        return ProcessHarness(MeanLine(self.v * self.xi_law.mean, 0.0), (1.0, 0.0, w2, 1.0), _vf(chi=1.0), (0.0, INF))


@dataclass(frozen=True)
class WienerShift(ProcessDescriptor):
    """X_t = W_{t - v^2} + v xi on (v^2, inf)."""

    kind: ClassVar[str] = "wiener-shift"
    v: float = 1.0
    xi_law: MixLaw = field(default_factory=MixLaw.rademacher)

    def check_grid(self, times):
        _check_increasing(times)
        if times[0] <= self.v**2:
            raise DomainViolation(f"wiener-shift lives on (v^2, inf) = ({self.v**2}, inf)")

    def _sample(self, times, seed, paths):
        xi = self.v * self.xi_law.quantile(uniforms(seed, paths, 0))
        return _brownian(times - self.v**2, seed, paths) + xi[:, None]

    def harness(self):
        # Cov = s - v^2 + Var(v xi)
        v2 = self.v**2
        b = v2 * (self.xi_law.variance - 1.0)
        return ProcessHarness(MeanLine(0.0, self.v * self.xi_law.mean), (1.0, b, 0.0, 1.0), _vf(chi=1.0), (v2, INF))


@dataclass(frozen=True)
class Poisson(ProcessDescriptor):
    kind: ClassVar[str] = "poisson"
    lam: float = 1.0

    def __post_init__(self):
        _positive("poisson", lam=self.lam)

    def _sample(self, times, seed, paths):
        out = np.empty((paths.size, times.size))
        acc = np.zeros(paths.size)
        for j, h in enumerate(_steps(times)):
            acc = acc + stats.poisson.ppf(uniforms(seed, paths, j + 1), self.lam * h)
            out[:, j] = acc
        return out

    def harness(self):
        # Var(X_t | F_su) = ((u-t)(t-s)/(u-s)) Delta
        return ProcessHarness(MeanLine(self.lam, 0.0), (self.lam, 0.0, 0.0, 1.0), _vf(theta=1.0), (0.0, INF))


@dataclass(frozen=True)
class Gamma(ProcessDescriptor):
    """Gamma process with shape alpha*t and rate beta at time t."""

    kind: ClassVar[str] = "gamma"
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        _positive("gamma", alpha=self.alpha, beta=self.beta)

    def _sample(self, times, seed, paths):
        return _gamma_path(times, seed, paths, self.alpha, self.beta)

    def harness(self):
        # beta increments: Var(X_t | F_su) = ((u-t)(t-s)/(u-s+1/alpha)) Delta^2/alpha
        a, b = self.alpha, self.beta
        return ProcessHarness(MeanLine(a / b, 0.0), (a / b**2, 0.0, 0.0, 1.0), _vf(tau=1.0 / a), (0.0, INF))


def _gamma_path(times, seed, paths, alpha, beta, first_slot=1):
    out = np.empty((paths.size, times.size))
    acc = np.zeros(paths.size)
    for j, h in enumerate(_steps(times)):
        acc = acc + special.gammaincinv(alpha * h, uniforms(seed, paths, first_slot + j)) / beta
        out[:, j] = acc
    return out


class _Bridge(ProcessDescriptor):
    def check_grid(self, times):
        _check_increasing(times)
        if times[0] <= 0 or times[-1] > self.V:
            raise DomainViolation(f"{self.kind} grid must lie in (0, V] = (0, {self.V}]")


@dataclass(frozen=True)
class DirichletBridge(_Bridge):
    """X_0 = 0, X_V = 1, (X_t - X_s)/(1 - X_s) ~ Beta(c(t - s), c(V - t))."""

    kind: ClassVar[str] = "dirichlet"
    c: float = 1.0
    V: float = 1.0

    def __post_init__(self):
        _positive("dirichlet", c=self.c, V=self.V)

    def _sample(self, times, seed, paths):
        out = np.empty((paths.size, times.size))
        x = np.zeros(paths.size)
        s = 0.0
        for j, t in enumerate(times):
            if t == self.V:
                x = np.ones(paths.size)
            else:
                frac = special.betaincinv(self.c * (t - s), self.c * (self.V - t), uniforms(seed, paths, j + 1))
                x = x + (1.0 - x) * frac
            out[:, j] = x
            s = t
        return out

    def harness(self):
        # Cov = s (V - t)/(V^2 (1 + cV)); conditional variance as for the gamma process with alpha = c
        V, c = self.V, self.c
        prod = (1.0 / (V * V * (1.0 + c * V)), 0.0, -1.0, V)
        return ProcessHarness(MeanLine(1.0 / V, 0.0), prod, _vf(tau=1.0 / c), (0.0, V))


@dataclass(frozen=True)
class BinomialBridge(_Bridge):
    """X_0 = 0, X_V = N, X_t - X_s | X_s ~ b(N - X_s, (t - s)/(V - s))."""

    kind: ClassVar[str] = "binomial"
    N: int = 1
    V: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.N, int) and self.N >= 1):
            raise InvalidDescriptor(f"binomial: N must be a positive integer, got {self.N!r}")
        _positive("binomial", V=self.V)

    def _sample(self, times, seed, paths):
        out = np.empty((paths.size, times.size))
        x = np.zeros(paths.size)
        s = 0.0
        for j, t in enumerate(times):
            if t == self.V:
                x = np.full(paths.size, float(self.N))
            else:
                p = (t - s) / (self.V - s)
                x = x + stats.binom.ppf(uniforms(seed, paths, j + 1), self.N - x, p)
            out[:, j] = x
            s = t
        return out

    def harness(self):
        # Cov = N s (V - t)/V^2; Var(X_t | F_su) = ((u-t)(t-s)/(u-s)) Delta
        V, N = self.V, float(self.N)
        return ProcessHarness(MeanLine(N / V, 0.0), (N / (V * V), 0.0, -1.0, V), _vf(theta=1.0), (0.0, V))


@dataclass(frozen=True)
class GammaRandomScale(ProcessDescriptor):
    """X_t = xi G_t with G a standard gamma process (shape t, rate 1)."""

    kind: ClassVar[str] = "gamma-scale"
    xi_law: MixLaw = field(default_factory=lambda: MixLaw((1.0, 3.0), (0.5, 0.5)))

    def _sample(self, times, seed, paths):
        xi = self.xi_law.quantile(uniforms(seed, paths, 0))
        return xi[:, None] * _gamma_path(times, seed, paths, 1.0, 1.0)

    def harness(self):
        # Cov = E(xi^2) s + Var(xi) s t; Var(X_t | F_su) = ((u-t)(t-s)/(u-s+1)) Delta^2
        law = self.xi_law
        prod = (1.0, 0.0, law.variance, law.second_moment)
        return ProcessHarness(MeanLine(law.mean, 0.0), prod, _vf(tau=1.0), (0.0, INF))


PROCESSES = {cls.kind: cls for cls in (Wiener, WienerDrift, WienerShift, Poisson, Gamma, DirichletBridge, BinomialBridge, GammaRandomScale)}


def descriptor_from_json(obj) -> ProcessDescriptor:
    obj = dict(obj)
    kind = obj.pop("kind", None)
    if kind == "transformed":
        from .transforms import Transformed

        return Transformed.from_json({"kind": kind, **obj})
    if kind not in PROCESSES:
        raise InvalidDescriptor(f"unknown process {kind!r}; known: {sorted(PROCESSES)}")
    if "xi_law" in obj:
        obj["xi_law"] = MixLaw.from_json(obj["xi_law"])
    if kind == "binomial" and "N" in obj:
        n = obj["N"]
        if isinstance(n, float) and n.is_integer():
            obj["N"] = int(n)
    try:
        return PROCESSES[kind](**obj)
    except TypeError as exc:
        raise InvalidDescriptor(str(exc)) from None


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Values on a grid, one row per path.

    ``weights`` is None for Monte-Carlo samples; for an exact law it holds
    the probability of each row and downstream estimators become exact.
    """

    times: np.ndarray
    values: np.ndarray
    seed: Optional[int] = None
    descriptor: Optional[ProcessDescriptor] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != times.size:
            raise ValueError(f"values shape {values.shape} does not match grid of size {times.size}")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.weights is not None:
            w = np.array(self.weights, dtype=np.float64)
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    @property
    def n_paths(self):
        return self.values.shape[0]

    def column(self, t, tol=1e-12):
        """Index of grid time ``t`` (relative tolerance ``tol``), or None."""
        hits = np.nonzero(np.abs(self.times - t) <= tol * max(1.0, abs(t)))[0]
        return int(hits[0]) if hits.size else None

    def at(self, t) -> np.ndarray:
        j = self.column(t)
        if j is None:
            from ..errors import GridMismatch

            raise GridMismatch(f"time {t!r} is not on the grid")
        return self.values[:, j]


def worker_count() -> int:
    env = os.environ.get("QH_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"QH_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def sample_ensemble(d: ProcessDescriptor, times, n_paths: int, seed: int) -> PathEnsemble:
    """Sample ``n_paths`` paths of ``d`` on ``times``; row i depends only on (seed, i)."""
    times = np.asarray(times, dtype=np.float64)
    if not isinstance(d, ProcessDescriptor):
        raise InvalidDescriptor(f"not a process descriptor: {d!r}")
    if int(n_paths) < 1:
        raise ValueError("n_paths must be at least 1")
    d.check_grid(times)
    chunks = [np.arange(lo, min(lo + CHUNK, n_paths), dtype=np.uint64) for lo in range(0, n_paths, CHUNK)]
    workers = min(worker_count(), len(chunks))
    if workers == 1:
        blocks = [d._sample(times, seed, c) for c in chunks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            blocks = list(pool.map(lambda c: d._sample(times, seed, c), chunks))
    return PathEnsemble(times, np.vstack(blocks), seed, d)
