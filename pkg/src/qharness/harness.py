"""Deterministic space-time transformations of harnesses with quadratic variances.

All functions are pure and generic over the scalar type: pass Fractions for
exact arithmetic, floats for double precision.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from . import linalg as la
from .errors import (
    DegenerateCovariance,
    NonpositiveChiTilde,
    PoleInInterval,
    SignViolation,
    SingularMap,
    WrongOrientation,
    ZeroDenominator,
    ZeroScale,
)
from .params import AffineMap, CovMatrix, DeltaPair, HarnessSpec, MeanLine, QHParams, VarianceForm
from .scalar import INF, is_zero, sign, squared


def eval_K(p: QHParams, d: DeltaPair):
    """1 + theta D + eta D~ + tau D^2 + sigma D~^2 - (1 - gamma) D D~."""
    x, y = d.slope, d.pivot
    return 1 + p.theta * x + p.eta * y + p.tau * x * x + p.sigma * y * y - (1 - p.gamma) * x * y


def F_denominator(p: QHParams, s, u):
    return u * (1 + s * p.sigma) + p.tau - s * p.gamma


def eval_F(p: QHParams, s, t, u):
    """F_{t,s,u} = (u - t)(t - s) / (u(1 + s sigma) + tau - s gamma)."""
    den = F_denominator(p, s, u)
    if is_zero(den):
        raise ZeroDenominator(f"u(1+s*sigma)+tau-s*gamma = 0 at s={s}, u={u}")
    return (u - t) * (t - s) / den


def eval_F_matrix(gamma_matrix, s, t, u):
    """<t, J u><s, J t> / <s, J^T Gamma J u>, valid for any 2x2 Gamma."""
    sv, tv, uv = la.tvec(s), la.tvec(t), la.tvec(u)
    den = la.quad(sv, la.matmul(la.transpose(la.J), la.matmul(gamma_matrix, la.J)), uv)
    if is_zero(den):
        raise ZeroDenominator("<s, J^T Gamma J u> = 0")
    return la.quad(tv, la.J, uv) * la.quad(sv, la.J, tv) / den


def cond_cov_factor(p: QHParams, s, t1, t2, u, d: DeltaPair):
    """Conditional covariance Cov(X_t1, X_t2 | F_{s,u}) for s < t1 <= t2 < u."""
    den = F_denominator(p, s, u)
    if is_zero(den):
        raise ZeroDenominator(f"u(1+s*sigma)+tau-s*gamma = 0 at s={s}, u={u}")
    return (u - t2) * (t1 - s) / den * eval_K(p, d)


def scale_transform(p: QHParams, a) -> QHParams:
    """Parameters of Z_t = a X_{t/a^2}."""
    if a == 0:
        raise ZeroScale("scale a must be non-zero")
    a2 = squared(a)
    return QHParams(p.eta / a, a * p.theta, p.sigma / a2, a2 * p.tau, p.gamma, p.standard_infinite_horizon)


def time_inversion(p: QHParams) -> QHParams:
    """Parameters of Y_t = t X_{1/t}: swap eta<->theta and sigma<->tau."""
    return QHParams(p.theta, p.eta, p.tau, p.sigma, p.gamma, p.standard_infinite_horizon)


# --------------------------------------------------------------------------
# Intervals under Mobius maps


def _is_inf(x):
    return isinstance(x, float) and math.isinf(x)


def preimage_interval(f: AffineMap, interval):
    """The domain S with phi(S) = interval, where phi is the Mobius map of f.

    Raises PoleInInterval when phi^{-1} has a pole strictly inside the
    interval; endpoints are ordered according to the sign of det(A).
    """
    lo, hi = interval
    a, b, c, d = f.a, f.b, f.c, f.d
    # phi^{-1}(t) = (d t - b) / (a - c t); its pole sits at t = a/c.
    if c != 0:
        pole = a / c
        if (_is_inf(lo) or lo < pole) and (_is_inf(hi) or pole < hi):
            raise PoleInInterval(f"Mobius pole at {pole} inside interval {interval}")

    def endpoint(e, inward):
        if _is_inf(e):
            if c == 0:
                s = sign(d) * sign(a) * (1 if e > 0 else -1)
                return INF if s > 0 else -INF
            return -d / c
        den = a - c * e
        num = d * e - b
        if den == 0:
            # one-sided limit from inside the interval
            s = sign(num) * sign(-c) * inward
            return INF if s > 0 else -INF
        return num / den

    x_lo, x_hi = endpoint(lo, 1), endpoint(hi, -1)
    return (x_lo, x_hi) if f.det > 0 else (x_hi, x_lo)


# --------------------------------------------------------------------------
# General affine transformation of a harness spec


def affine_transform_spec(h: HarnessSpec, f: AffineMap) -> HarnessSpec:
    """Moments and variance form of X^f: Y_t = (ct+d) X_{phi(t)} + m1 t + m2."""
    A = f.matrix
    det = f.det
    if det == 0:
        raise SingularMap("det(A) = 0")
    A_t = la.transpose(A)
    A_inv = la.inv2(A)
    A_inv_t = la.transpose(A_inv)
    m = f.shift
    interval = preimage_interval(f, h.interval)

    sigma = h.cov.matrix()
    gamma = h.var_form.gamma_matrix()
    if det > 0:
        new_sigma = la.matmul(A_t, la.matmul(sigma, A))
        new_gamma = la.matmul(A_inv, la.matmul(gamma, A_inv_t))
    else:
        # decreasing time change reverses s <= t, so both matrices enter transposed
        new_sigma = la.matmul(A_t, la.matmul(la.transpose(sigma), A))
        new_gamma = la.matmul(A_inv, la.matmul(la.transpose(gamma), A_inv_t))

    new_mu = la.vadd(la.matvec(A_t, h.mean.vector()), m)
    sym = la.add(new_gamma, la.transpose(new_gamma))
    new_theta = la.vadd(la.matvec(A_inv, h.var_form.lin()), la.vscale(-1, la.matvec(sym, m)))
    new_chi = h.var_form.chi - la.dot(new_theta, m) - la.quad(m, new_gamma, m)

    vf = VarianceForm(
        new_chi, new_theta[0], new_theta[1], new_gamma[0][0], new_gamma[0][1], new_gamma[1][0], new_gamma[1][1]
    )
    cov = CovMatrix(new_sigma[0][0], new_sigma[0][1], new_sigma[1][0], new_sigma[1][1])
    return HarnessSpec(MeanLine(*new_mu), cov, vf, interval)


def normalize_gamma(h: HarnessSpec) -> HarnessSpec:
    """Re-split Gamma's off-diagonal so that the consistency identity holds.

    Only g12 + g21 enters K; the split is fixed by requiring
    chi + <theta,mu> + <mu,Gamma mu> + tr(Gamma Sigma^T) = 0,
    which is linear in g12 with coefficient c1 - c2.
    """
    cov, vf = h.cov, h.var_form
    if cov.c1 == cov.c2:
        raise DegenerateCovariance("c1 = c2: the split of Gamma is not determined")
    mu1, mu2 = h.mean.vector()
    rho = vf.rho
    rest = (
        vf.chi
        + vf.theta * mu1
        + vf.eta * mu2
        + vf.tau * mu1 * mu1
        + rho * mu1 * mu2
        + vf.sigma * mu2 * mu2
        + vf.tau * cov.c0
        + rho * cov.c2
        + vf.sigma * cov.c3
    )
    g12 = -rest / (cov.c1 - cov.c2)
    return HarnessSpec(h.mean, h.cov, VarianceForm(vf.chi, vf.theta, vf.eta, vf.tau, g12, rho - g12, vf.sigma), h.interval)


# --------------------------------------------------------------------------
# Reduction of a product-covariance harness to a standard quadratic harness


class StandardForm(NamedTuple):
    params: QHParams
    transform: AffineMap
    interval: tuple
    chi_tilde: object


def _positive_on(a, b, c, d, interval):
    """(a t + b)(c t + d) > 0 on the open interval."""
    lo, hi = interval
    inside = lambda t: (_is_inf(lo) or lo < t) and (_is_inf(hi) or t < hi)  # noqa: E731
    for lin, const in ((a, b), (c, d)):
        if lin != 0 and inside(-const / lin):
            return False
    if _is_inf(lo) and _is_inf(hi):
        probe = 0
    elif _is_inf(lo):
        probe = hi - 1
    elif _is_inf(hi):
        probe = lo + 1
    else:
        probe = (lo + hi) / 2
    return (a * probe + b) * (c * probe + d) > 0


def standardizing_map(mean: MeanLine, cov_product) -> AffineMap:
    """Y_t = ((a - ct)/(ad - bc))(X_{psi(t)} - alpha - beta psi(t)) as an AffineMap."""
    a, b, c, d = cov_product
    det = a * d - b * c
    A = ((d / det, -b / det), (-c / det, a / det))
    m = la.vscale(-1, la.matvec(la.transpose(A), mean.vector()))
    return AffineMap.from_matrix(A, m)


def harness_to_qh(mean: MeanLine, cov_product, vf: VarianceForm, interval=None) -> StandardForm:
    """Standardize a harness with covariance (a s + b)(c t + d), s < t.

    ``vf.rho`` is the full coefficient of Delta*Delta~ in K.  Returns the
    quadratic-harness parameters of
    Y_t = ((a - c t)/(ad - bc)) (X_{psi(t)} - alpha - beta psi(t)),
    psi(t) = (d t - b)/(a - c t), together with the affine map realizing Y,
    the image interval (None if no interval was given) and chi~.
    """
    a, b, c, d = cov_product
    alpha, beta = mean.intercept, mean.slope
    chi, theta, eta, sigma, tau, rho = vf.chi, vf.theta, vf.eta, vf.sigma, vf.tau, vf.rho
    det = a * d - b * c
    if not det > 0:
        raise WrongOrientation(f"ad - bc = {det} must be positive")
    if interval is not None and not _positive_on(a, b, c, d, interval):
        raise SignViolation(f"(at+b)(ct+d) is not positive on {interval}")
    chi_t = chi + alpha * eta + theta * beta + sigma * alpha * alpha + tau * beta * beta + rho * alpha * beta
    if not chi_t > 0:
        raise NonpositiveChiTilde(f"chi~ = {chi_t} must be positive")

    left = eta + beta * rho + 2 * alpha * sigma
    right = theta + alpha * rho + 2 * beta * tau
    params = QHParams(
        eta=(d * left + c * right) / chi_t,
        theta=(b * left + a * right) / chi_t,
        sigma=(tau * c * c + d * rho * c + d * d * sigma) / chi_t,
        tau=(tau * a * a + b * rho * a + b * b * sigma) / chi_t,
        gamma=1 + (b * c * rho + a * d * rho + 2 * b * d * sigma + 2 * a * c * tau) / chi_t,
    )
    f = standardizing_map(mean, cov_product)
    new_interval = preimage_interval(f, interval) if interval is not None else None
    return StandardForm(params, f, new_interval, chi_t)


def qh_inverse_representation(f: AffineMap, mean: MeanLine) -> AffineMap:
    """Map g with X = Y^g, i.e. X_t = (ct+d) Y_{(at+b)/(ct+d)} + alpha + beta t.

    ``f`` is the standardizing map returned by :func:`harness_to_qh`.
    """
    if f.det == 0:
        raise SingularMap("det(A) = 0")
    B = la.inv2(f.matrix)
    return AffineMap.from_matrix(B, mean.vector())


def represented_spec(p: QHParams, g: AffineMap, interval) -> HarnessSpec:
    """Spec of Y^g for a standard Y in QH(p) living on ``interval``."""
    return affine_transform_spec(HarnessSpec.standard(p, interval), g)


# --------------------------------------------------------------------------
# Population identities


class PopulationMoments(NamedTuple):
    cov_delta: tuple
    e_var: object
    e_K: object
    F: object


def population_identities(cov: CovMatrix, vf: VarianceForm, mean: MeanLine, s, t, u) -> PopulationMoments:
    """Cov of (Delta, Delta~), E Var(X_t|F_su), E K(Delta) and F for s < t < u."""
    sv, tv, uv = la.tvec(s), la.tvec(t), la.tvec(u)
    gap = cov.c1 - cov.c2
    j_u = la.matvec(la.J, uv)
    j_s = la.matvec(la.J, sv)
    cov_delta = la.add(la.scale(gap / (u - s), la.outer(j_u, j_s)), la.transpose(cov.matrix()))
    e_var = (t - s) * (u - t) / (u - s) * gap
    g = vf.gamma_matrix()
    jtgj = la.matmul(la.transpose(la.J), la.matmul(g, la.J))
    mu = mean.vector()
    e_K = la.trace(la.matmul(g, la.transpose(cov.matrix()))) + vf(mu) + gap * la.quad(sv, jtgj, uv) / (u - s)
    F = eval_F_matrix(g, s, t, u)
    return PopulationMoments(cov_delta, e_var, e_K, F)


class PsdCheck(NamedTuple):
    closed: object
    brute: object


def _gram_det_formula(cov: CovMatrix, times, power):
    gap = cov.c1 - cov.c2
    out = gap**power * times[0]
    for a, b in zip(times, times[1:]):
        out *= b - a
    return out * (cov.c3 * gap + (cov.c0 * cov.c3 - cov.c2 * cov.c2) * times[-1])


def _check_times(times):
    times = list(times)
    if not times or any(x <= 0 for x in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be positive and strictly increasing")
    return times


def printed_gram_determinant(cov: CovMatrix, times):
    """(c1-c2)^n (s_n - s_{n-1}) ... (s_2 - s_1) s_1 (c3 (c1-c2) + (c0 c3 - c2^2) s_n).

    This is the commonly quoted form; it carries one factor (c1 - c2) too
    many, see :func:`cov_psd_check`.
    """
    times = _check_times(times)
    return _gram_det_formula(cov, times, len(times))


def cov_psd_check(cov: CovMatrix, times) -> PsdCheck:
    """Closed-form and brute-force determinants of the Gram matrix on 0 = s_0 < s_1 < ... < s_n.

    The Gram matrix is [c(s_i, s_j)] over i, j = 0..n.  Its determinant is
    (c1-c2)^(n-1) (s_n - s_{n-1}) ... (s_2 - s_1) s_1 (c3 (c1-c2) + (c0 c3 - c2^2) s_n);
    for n = 1 this reads s_1 (c3 (c1-c2) + (c0 c3 - c2^2) s_1).
    """
    times = _check_times(times)
    closed = _gram_det_formula(cov, times, len(times) - 1)
    grid = [0] + times
    gram = [[cov.covariance(x, y) for y in grid] for x in grid]
    return PsdCheck(closed, la.det_exact(gram))
