"""Exact finite-state oracles: the binomial bridge law and beta-increment conditionals."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from ..errors import DomainViolation, TooLarge
from .processes import BinomialBridge, PathEnsemble

MAX_N = 6
MAX_POINTS = 5


def _binom_pmf(n, k, p):
    if k < 0 or k > n:
        return Fraction(0)
    return comb(n, k) * p**k * (1 - p) ** (n - k)


@dataclass(frozen=True)
class BinomialBridgeLaw:
    """Joint law of a binomial bridge on a grid; probabilities are Fractions."""

    N: int
    V: Fraction
    times: tuple
    pmf: dict  # state tuple -> probability

    def index(self, t):
        t = Fraction(t)
        try:
            return self.times.index(t)
        except ValueError:
            raise DomainViolation(f"time {t} is not on the grid {self.times}") from None

    def marginal(self, t):
        i = self.index(t)
        out = {}
        for state, p in self.pmf.items():
            out[state[i]] = out.get(state[i], Fraction(0)) + p
        return out

    def conditional(self, t, given):
        """Law of X_t given {time: value}; empty dict if the event is null."""
        i = self.index(t)
        idx = {self.index(s): v for s, v in given.items()}
        total = Fraction(0)
        out = {}
        for state, p in self.pmf.items():
            if all(state[j] == v for j, v in idx.items()):
                out[state[i]] = out.get(state[i], Fraction(0)) + p
                total += p
        if total == 0:
            return {}
        return {k: v / total for k, v in out.items()}

    def cond_mean(self, s, t, u, x_s, x_u):
        law = self._cond_or_raise(s, t, u, x_s, x_u)
        return sum(k * p for k, p in law.items())

    def cond_var(self, s, t, u, x_s, x_u):
        law = self._cond_or_raise(s, t, u, x_s, x_u)
        m = sum(k * p for k, p in law.items())
        return sum((k - m) ** 2 * p for k, p in law.items())

    def _cond_or_raise(self, s, t, u, x_s, x_u):
        law = self.conditional(t, {s: x_s, u: x_u})
        if not law:
            raise DomainViolation(f"P(X_{s}={x_s}, X_{u}={x_u}) = 0")
        return law

    def pairs(self, s, u):
        """All (x_s, x_u) with positive probability."""
        i, j = self.index(s), self.index(u)
        return sorted({(st[i], st[j]) for st in self.pmf})

    def as_ensemble(self) -> PathEnsemble:
        """Support points as rows, weighted by their probabilities."""
        states = sorted(self.pmf)
        vals = np.array(states, dtype=np.float64).reshape(len(states), len(self.times))
        w = np.array([float(self.pmf[s]) for s in states])
        return PathEnsemble(np.array([float(t) for t in self.times]), vals, None, BinomialBridge(self.N, float(self.V)), w)


def enumerate_binomial_bridge(N: int, V, times) -> BinomialBridgeLaw:
    """Exact joint law of X on ``times`` for X_0 = 0, X_V = N and binomial increments."""
    if not isinstance(N, int) or N < 1:
        raise DomainViolation(f"N must be a positive integer, got {N!r}")
    times = tuple(Fraction(t) for t in times)
    V = Fraction(V)
    if N > MAX_N or len(times) > MAX_POINTS:
        raise TooLarge(f"enumeration limited to N <= {MAX_N} and at most {MAX_POINTS} grid points")
    if not times or times[0] <= 0 or times[-1] > V or any(b <= a for a, b in zip(times, times[1:])):
        raise DomainViolation("grid must be strictly increasing in (0, V]")
    pmf = {}
    for state in itertools.product(range(N + 1), repeat=len(times)):
        p = Fraction(1)
        prev_t, prev_x = Fraction(0), 0
        for t, x in zip(times, state):
            p *= _binom_pmf(N - prev_x, x - prev_x, (t - prev_t) / (V - prev_t))
            if p == 0:
                break
            prev_t, prev_x = t, x
        if p:
            pmf[state] = p
    return BinomialBridgeLaw(N, V, times, pmf)


def exact_beta_conditionals(c, V, s, t, u, x_s, x_u):
    """Conditional mean and variance of the Dirichlet bridge at t given X_s, X_u.

    Works on Fractions (exact) or floats.
    """
    if not (0 <= s < t < u <= V):
        raise DomainViolation(f"need 0 <= s < t < u <= V, got {(s, t, u, V)}")
    if not (0 <= x_s <= x_u <= 1):
        raise DomainViolation(f"need 0 <= x_s <= x_u <= 1, got {(x_s, x_u)}")
    gap = u - s
    mean = x_s + (x_u - x_s) * (t - s) / gap
    var = (x_u - x_s) ** 2 * (t - s) * (u - t) / (gap * gap * (c * gap + 1))
    return mean, var
