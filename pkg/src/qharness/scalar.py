"""Scalar helpers that let the same formulas run on floats or exact rationals.

Every operation in :mod:`qharness.harness` and :mod:`qharness.conditioning`
is written with plain arithmetic, so feeding it ``fractions.Fraction`` values
gives exact results and feeding it floats gives double precision results.

Square roots are the one place where rationals are not closed.  ``sqrt`` of a
rational returns a :class:`Surd` (``coef * sqrt(rad)`` with rational ``coef``
and ``rad``), which supports the products, quotients and commensurable sums
that the transformation formulas need.  Anything that would leave ``Q(sqrt r)``
raises ``TypeError`` instead of silently rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

FLOAT_TOL = 1e-12

INF = float("inf")


def _rational_sqrt(q):
    """Exact square root of a non-negative rational, or None if irrational."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def surd(coef, rad):
    """Build ``coef * sqrt(rad)``, collapsing to a Fraction when rational."""
    coef = Fraction(coef)
    rad = Fraction(rad)
    if rad < 0:
        raise ValueError(f"negative radicand {rad}")
    if coef == 0 or rad == 0:
        return Fraction(0)
    root = _rational_sqrt(rad)
    if root is not None:
        return coef * root
    return Surd(coef, rad)


class Surd:
    """An exact real number of the form ``coef * sqrt(rad)``.

    Instances are immutable.  Equality and ordering compare sign and square,
    which is exact for any two values in the field.
    """

    __slots__ = ("coef", "rad")

    def __init__(self, coef, rad):
        self.coef = Fraction(coef)
        self.rad = Fraction(rad)

    # -- basic queries -------------------------------------------------
    def square(self):
        return self.coef * self.coef * self.rad

    @property
    def sign(self):
        return (self.coef > 0) - (self.coef < 0)

    def __float__(self):
        return float(self.coef) * math.sqrt(float(self.rad))

    def __repr__(self):
        return f"Surd({self.coef}*sqrt({self.rad}))"

    # -- arithmetic ----------------------------------------------------
    def __neg__(self):
        return Surd(-self.coef, self.rad)

    def __pos__(self):
        return self

    def __abs__(self):
        return Surd(abs(self.coef), self.rad)

    def __mul__(self, other):
        if isinstance(other, Surd):
            return surd(self.coef * other.coef, self.rad * other.rad)
        if isinstance(other, Rational):
            return surd(self.coef * other, self.rad)
        if isinstance(other, float):
            return float(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def _inverse(self):
        # 1/(c sqrt r) = sqrt(r)/(c r)
        return Surd(1 / (self.coef * self.rad), self.rad)

    def __truediv__(self, other):
        if isinstance(other, Surd):
            return self * other._inverse()
        if isinstance(other, Rational):
            return surd(self.coef / other, self.rad)
        if isinstance(other, float):
            return float(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Rational):
            return self._inverse() * other
        if isinstance(other, float):
            return other / float(self)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Surd):
            ratio = _rational_sqrt(self.rad / other.rad)
            if ratio is None:
                raise TypeError(f"cannot add incommensurable surds {self!r} + {other!r}")
            return surd(self.coef * ratio + other.coef, other.rad)
        if isinstance(other, Rational):
            if other == 0:
                return self
            raise TypeError(f"cannot add rational {other} to irrational {self!r}")
        if isinstance(other, float):
            return float(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self._inverse() ** (-n)
        out = Fraction(1)
        for _ in range(n):
            out = out * self
        return out

    # -- comparison ----------------------------------------------------
    def _cmp(self, other):
        if isinstance(other, float):
            x = float(self)
            return (x > other) - (x < other)
        s1, s2 = sign(self), sign(other)
        if s1 != s2:
            return (s1 > s2) - (s1 < s2)
        q1, q2 = squared(self), squared(other)
        c = (q1 > q2) - (q1 < q2)
        return c if s1 >= 0 else -c

    def __eq__(self, other):
        if not isinstance(other, (Surd, Rational, float)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.sign, self.square()))


def is_exact(x):
    return isinstance(x, (Rational, Surd)) and not isinstance(x, bool)


def sign(x):
    if isinstance(x, Surd):
        return x.sign
    return (x > 0) - (x < 0)


def squared(x):
    """``x*x``, exact (rational) for surds."""
    if isinstance(x, Surd):
        return x.square()
    return x * x


def sqrt(x):
    """Square root that stays exact on rationals (returns a Surd if needed)."""
    if isinstance(x, Surd):
        raise TypeError("nested radicals are not supported")
    if isinstance(x, Rational):
        if x < 0:
            raise ValueError(f"sqrt of negative number {x}")
        return surd(1, x)
    if x < 0:
        raise ValueError(f"sqrt of negative number {x}")
    return math.sqrt(x)


def is_zero(x, tol=FLOAT_TOL):
    """Exact zero test for rationals and surds, absolute tolerance for floats."""
    if is_exact(x):
        return x == 0
    return abs(x) <= tol


def close(a, b, tol=FLOAT_TOL):
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= tol


def as_float(x):
    return float(x)


def parse_scalar(value, mode="float"):
    """Parse a JSON scalar (number, ``"p/q"`` string, ``"inf"``) for a mode."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return INF
        if text in ("-inf", "-infinity"):
            return -INF
    elif isinstance(value, float) and math.isinf(value):
        return value
    if mode == "rational":
        if isinstance(value, float):
            return Fraction(repr(value))
        return Fraction(value)
    if mode == "float":
        if isinstance(value, str) and "/" in value:
            return float(Fraction(value))
        return float(value)
    raise ValueError(f"unknown scalar mode {mode!r}")


def to_jsonable(x):
    """Encode a scalar for JSON; rationals become ``"p/q"`` strings."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, Surd):
        return {"sign": x.sign, "square": to_jsonable(x.square()), "approx": float(x)}
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    x = float(x) + 0.0  # drops the sign of -0.0
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x
