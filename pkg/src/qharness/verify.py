"""Estimate conditional moments from ensembles and compare them with predictions.

Conditional mean: regress X_t on (1, X_s, X_u).
Conditional variance: regress the squared harness residual
r = X_t - ((u-t) X_s + (t-s) X_u)/(u-s) on (1, D, D~, D^2, D~^2, D D~).
A quadratic harness predicts the coefficient vectors
(0, (u-t)/(u-s), (t-s)/(u-s)) and F_{t,s,u} (1, theta, eta, tau, sigma, gamma-1).

Every cross-path sum is a numpy reduction over one contiguous array
(pairwise summation), so results do not depend on how the ensemble was
produced.  Weighted ensembles (exact laws) give population coefficients
and zero standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import linalg as sla

from .errors import EmptyEnsemble, MismatchedTriples, SingularDesign
from .harness import eval_F
from .params import QHParams
from .sim.processes import PathEnsemble

LINEAR_BASIS = ("1", "X_s", "X_u")
VARIANCE_BASIS = ("1", "D", "D~", "D^2", "D~^2", "D*D~")
RANK_TOL = 1e-10
ABS_TOL = 1e-12


def _sum(x: np.ndarray) -> float:
    return float(np.sum(np.ascontiguousarray(x, dtype=np.float64)))


def _weights(e: PathEnsemble):
    if e.weights is None:
        return None
    w = np.asarray(e.weights, dtype=np.float64)
    return w / _sum(w)


def _avg(x, w):
    return _sum(x * w) if w is not None else _sum(x) / x.size


# --------------------------------------------------------------------------
# Unconditional moments


@dataclass(frozen=True)
class MeanCov:
    times: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    se_mean: np.ndarray
    se_cov: np.ndarray


def estimate_mean_cov(e: PathEnsemble) -> MeanCov:
    """Sample means and covariances with plug-in standard errors."""
    n, m = e.values.shape
    w = _weights(e)
    if w is None and n < 2:
        raise EmptyEnsemble(f"need at least 2 paths, got {n}")
    cols = [np.ascontiguousarray(e.values[:, j]) for j in range(m)]
    mean = np.array([_avg(c, w) for c in cols])
    dev = [c - mu for c, mu in zip(cols, mean)]
    cov = np.empty((m, m))
    se_cov = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            prod = dev[i] * dev[j]
            if w is None:
                c = _sum(prod) / (n - 1)
                fourth = _sum(prod * prod) / n
                se_cov[i, j] = se_cov[j, i] = math.sqrt(max(fourth - (c * (n - 1) / n) ** 2, 0.0) / n)
            else:
                c = _sum(prod * w)
            cov[i, j] = cov[j, i] = c
    se_mean = np.zeros(m) if w is not None else np.sqrt(np.diag(cov) / n)
    return MeanCov(e.times.copy(), mean, cov, se_mean, se_cov)


# --------------------------------------------------------------------------
# Regression core


@dataclass(frozen=True)
class CoefFit:
    """One regression: fitted coefficients, robust SEs and the comparison with a prediction.

    Arrays run over the full basis; entries of dropped columns are NaN.
    ``projector`` maps a full-basis coefficient vector to the coefficients
    of its best approximation in the kept columns, which is what the
    fitted values estimate when the design is rank deficient.
    """

    basis: tuple
    fitted: np.ndarray
    se: np.ndarray
    dropped: tuple
    projector: np.ndarray
    kept: tuple
    predicted: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    passed: Optional[np.ndarray] = None

    def failing(self):
        if self.passed is None:
            return ()
        return tuple(self.basis[i] for i in self.kept if not self.passed[i])

    def to_json(self):
        def enc(a):
            if a is None:
                return None
            return [None if (isinstance(x, float) and math.isnan(x)) else x for x in (float(v) for v in a)]

        out = {
            "basis": list(self.basis),
            "fitted": enc(self.fitted),
            "se": enc(self.se),
            "predicted": enc(self.predicted),
            "z": enc(self.z),
            "dropped": list(self.dropped),
        }
        if self.passed is not None:
            out["verdicts"] = [None if i not in self.kept else ("PASS" if self.passed[i] else "FAIL") for i in range(len(self.basis))]
        return out


def _gram(cols, w, other=None):
    other = cols if other is None else other
    g = np.empty((len(cols), len(other)))
    for i, a in enumerate(cols):
        for j, b in enumerate(other):
            g[i, j] = _sum(a * b * w) if w is not None else _sum(a * b)
    return g


def _pivoted_rank(g: np.ndarray, tol=RANK_TOL):
    """Greedy pivoted Cholesky on a unit-diagonal Gram matrix; returns kept indices."""
    a = g.copy()
    p = a.shape[0]
    remaining = list(range(p))
    kept = []
    scale = max(float(np.max(np.diag(a))), 1.0) if p else 1.0
    while remaining:
        d = [a[i, i] for i in remaining]
        k = int(np.argmax(d))
        if d[k] <= tol * scale:
            break
        piv = remaining.pop(k)
        kept.append(piv)
        r = math.sqrt(a[piv, piv])
        col = a[:, piv] / r
        for i in remaining:
            for j in remaining:
                a[i, j] -= col[i] * col[j]
    return sorted(kept)


def _regress(columns, y, w, names, exact):
    p = len(columns)
    n = y.size
    norms = np.array([math.sqrt(_avg(c * c, w)) for c in columns])
    safe = np.where(norms > 0, norms, 1.0)
    z = [np.ascontiguousarray(c / s) for c, s in zip(columns, safe)]
    g_all = _gram(z, w)
    if w is None:
        g_all = g_all / n
    kept = tuple(i for i in _pivoted_rank(g_all) if norms[i] > 0)
    if not kept:
        raise SingularDesign("no identifiable column in the design")
    g = g_all[np.ix_(kept, kept)]
    rhs = np.array([_avg(z[i] * y, w) for i in kept])
    lu = sla.lu_factor(g)
    beta = sla.lu_solve(lu, rhs)

    fitted = np.full(p, np.nan)
    se = np.full(p, np.nan)
    fitted[list(kept)] = beta / safe[list(kept)]
    if exact:
        se[list(kept)] = 0.0
    else:
        resid = y - sum(b * z[i] for b, i in zip(beta, kept))
        e2 = resid * resid
        meat = np.empty((len(kept), len(kept)))
        for a, i in enumerate(kept):
            for b, j in enumerate(kept):
                meat[a, b] = _sum(z[i] * z[j] * e2) / n
        ginv = sla.lu_solve(lu, np.eye(len(kept)))
        cov = ginv @ meat @ ginv.T / n
        se[list(kept)] = np.sqrt(np.maximum(np.diag(cov), 0.0)) / safe[list(kept)]

    # coefficients c (full, unscaled) -> kept coefficients of the projection of X c
    proj_scaled = sla.lu_solve(lu, g_all[list(kept), :])
    projector = (proj_scaled * safe[None, :]) / safe[list(kept)][:, None]
    dropped = tuple(names[i] for i in range(p) if i not in kept)
    return CoefFit(tuple(names), fitted, se, dropped, projector, kept)


# --------------------------------------------------------------------------
# Harness fits


@dataclass(frozen=True)
class FitReport:
    triple: tuple
    linear: CoefFit
    variance: Optional[CoefFit] = None
    exact: bool = False
    tol_sigmas: Optional[float] = None

    @property
    def verdict(self):
        parts = [f for f in (self.linear, self.variance) if f is not None]
        if any(f.passed is None for f in parts):
            return None
        return "PASS" if all(not f.failing() for f in parts) else "FAIL"

    def failing(self):
        out = []
        for tag, f in (("linear", self.linear), ("variance", self.variance)):
            if f is not None:
                out += [f"{tag}:{name}" for name in f.failing()]
        return out

    def to_json(self):
        return {
            "triple": [float(x) for x in self.triple],
            "exact": self.exact,
            "tol_sigmas": self.tol_sigmas,
            "linear": self.linear.to_json(),
            "variance": self.variance.to_json() if self.variance is not None else None,
            "verdict": self.verdict,
        }


def _triple_columns(e: PathEnsemble, s, t, u):
    if not s < t < u:
        raise ValueError(f"need s < t < u, got {(s, t, u)}")
    if e.n_paths < 2 and e.weights is None:
        raise EmptyEnsemble(f"need at least 2 paths, got {e.n_paths}")
    return (np.ascontiguousarray(e.at(x)) for x in (s, t, u))


def check_harness(e: PathEnsemble, s, t, u) -> FitReport:
    """Regress X_t on (1, X_s, X_u)."""
    xs, xt, xu = _triple_columns(e, s, t, u)
    w = _weights(e)
    lin = _regress([np.ones_like(xs), xs, xu], xt, w, LINEAR_BASIS, w is not None)
    return FitReport((s, t, u), lin, None, w is not None)


def fit_conditional_variance(e: PathEnsemble, s, t, u) -> FitReport:
    """Linear fit plus the regression of squared harness residuals on the (D, D~) basis."""
    xs, xt, xu = _triple_columns(e, s, t, u)
    w = _weights(e)
    exact = w is not None
    lin = _regress([np.ones_like(xs), xs, xu], xt, w, LINEAR_BASIS, exact)
    gap = u - s
    r = xt - ((u - t) * xs + (t - s) * xu) / gap
    D = (xu - xs) / gap
    Dt = (u * xs - s * xu) / gap
    cols = [np.ones_like(D), D, Dt, D * D, Dt * Dt, D * Dt]
    var = _regress(cols, r * r, w, VARIANCE_BASIS, exact)
    return FitReport((s, t, u), lin, var, exact)


# --------------------------------------------------------------------------
# Predictions and verdicts


@dataclass(frozen=True)
class Prediction:
    params: QHParams
    triple: tuple

    def linear(self):
        s, t, u = self.triple
        return np.array([0.0, (u - t) / (u - s), (t - s) / (u - s)])

    def variance(self):
        s, t, u = self.triple
        p = self.params.to_float()
        F = float(eval_F(p, s, t, u))
        return F * np.array([1.0, p.theta, p.eta, p.tau, p.sigma, p.gamma - 1.0])


def _compare(fit: CoefFit, full_pred, tol, abs_tol):
    pred = np.full(len(fit.basis), np.nan)
    kept = list(fit.kept)
    pred[kept] = fit.projector @ full_pred
    diff = fit.fitted - pred
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(fit.se > 0, diff / fit.se, np.where(np.abs(diff) <= abs_tol, 0.0, np.sign(diff) * np.inf))
    ok = np.zeros(len(fit.basis), dtype=bool)
    ok[kept] = (np.abs(diff[kept]) <= tol * fit.se[kept]) | (np.abs(diff[kept]) <= abs_tol)
    return replace(fit, predicted=pred, z=z, passed=ok)


def compare_to_prediction(fit: FitReport, predicted: Prediction, tol_sigmas: float = 3.0, abs_tol: float = ABS_TOL) -> FitReport:
    """Attach predictions, z-scores and per-coefficient verdicts to ``fit``."""
    if not np.allclose(np.asarray(fit.triple, float), np.asarray(predicted.triple, float), rtol=1e-12, atol=0.0):
        raise MismatchedTriples(f"fit is for {fit.triple}, prediction for {predicted.triple}")
    lin = _compare(fit.linear, predicted.linear(), tol_sigmas, abs_tol)
    var = _compare(fit.variance, predicted.variance(), tol_sigmas, abs_tol) if fit.variance is not None else None
    return replace(fit, linear=lin, variance=var, tol_sigmas=tol_sigmas)
