"""Tiny exact-friendly linear algebra.

Matrices are tuples of row tuples and vectors are tuples, so entries can be
floats, Fractions or Surds without any coercion.  Only what the harness
calculus needs is here: 2x2 products/inverses and an exact determinant.
"""

from __future__ import annotations

from fractions import Fraction

# J = [[0, 1], [-1, 0]]; J^2 = -I, J^T = -J.
J = ((0, 1), (-1, 0))
I2 = ((1, 0), (0, 1))


def mat(a, b, c, d):
    return ((a, b), (c, d))


def transpose(m):
    return ((m[0][0], m[1][0]), (m[0][1], m[1][1]))


def matmul(x, y):
    return (
        (x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
        (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]),
    )


def matvec(m, v):
    return (m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1])


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def quad(u, m, v):
    """Bilinear form <u, m v>."""
    return dot(u, matvec(m, v))


def add(x, y):
    return ((x[0][0] + y[0][0], x[0][1] + y[0][1]), (x[1][0] + y[1][0], x[1][1] + y[1][1]))


def scale(k, m):
    return ((k * m[0][0], k * m[0][1]), (k * m[1][0], k * m[1][1]))


def vadd(u, v):
    return (u[0] + v[0], u[1] + v[1])


def vscale(k, v):
    return (k * v[0], k * v[1])


def det2(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def inv2(m):
    d = det2(m)
    if d == 0:
        raise ZeroDivisionError("singular 2x2 matrix")
    return ((m[1][1] / d, -m[0][1] / d), (-m[1][0] / d, m[0][0] / d))


def trace(m):
    return m[0][0] + m[1][1]


def outer(u, v):
    return ((u[0] * v[0], u[0] * v[1]), (u[1] * v[0], u[1] * v[1]))


def tvec(t):
    """The projective time vector [t, 1]."""
    return (t, 1)


def det_exact(rows):
    """Determinant of a square matrix by Gaussian elimination with Fractions.

    Entries are converted with ``Fraction`` so the result is exact for
    rational input.
    """
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f:
                row_r, row_c = a[r], a[col]
                for k in range(col, n):
                    row_r[k] -= f * row_c[k]
    return det
