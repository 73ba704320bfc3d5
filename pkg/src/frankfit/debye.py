"""Debye functions D_k(theta) = k theta^-k int_0^theta t^k / (e^t - 1) dt, k in {1, 2},
and the population Kendall tau and Spearman rho of the Frank family.

Production evaluation uses a fixed 61-node Gauss-Legendre rule on
[0, min(|theta|, 30)].  Beyond 30 the full integral k! zeta(k+1) minus a
closed-form exponential tail is used.  Negative arguments go through

    D_k(-theta) = D_k(theta) + k theta / (k + 1).

tau and rho cancel badly when written through D_k at small theta.  With
q(t) = t/(e^t - 1) - 1 + t/2 (even, about t^2/12) they are instead

    tau = (4 / theta^2) int_0^theta q(t) dt
    rho = (12 / theta^3) int_0^theta q(t) (2t - theta) dt

which is free of cancellation; D_k is used only for |theta| > 30.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .errors import QuadratureNotConverged
from .quadrature import QuadratureSpec, Rule, fixed_gl_scaled

SMALL_THETA = 1e-4
GL_CUTOFF = 30.0

DEFAULT_SPEC = QuadratureSpec(Rule.GAUSS_LEGENDRE, 61, 1e-12)

# int_0^inf t^k / (e^t - 1) dt = k! zeta(k + 1)
_FULL_INTEGRAL = {1: math.pi**2 / 6.0, 2: 2.0 * 1.2020569031595942}


# t/(e^t - 1) = sum_n B_n t^n / n!; q keeps the even terms from t^2 on
_Q_SERIES_CUTOFF = 0.5
_Q_COEF = np.array([special.bernoulli(2 * j)[2 * j] / math.factorial(2 * j) for j in range(9, 0, -1)])


def _q(t):
    """t/(e^t - 1) - 1 + t/2, accurate to a few ulps relative near 0."""
    t = np.asarray(t, float)
    small = np.abs(t) < _Q_SERIES_CUTOFF
    tt = np.where(small, t, 0.0) ** 2
    series = np.polyval(_Q_COEF, tt) * tt
    safe = np.where(small, 1.0, t)
    with np.errstate(over="ignore"):
        direct = safe / np.expm1(safe) - 1.0 + 0.5 * safe
    return np.where(small, series, direct)


def _integrand(k: int, t):
    t = np.asarray(t, float)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(t == 0, 1.0, t / np.expm1(t))
    return ratio if k == 1 else t * ratio


def _tail(k: int, x):
    """int_x^inf t^k / (e^t - 1) dt for x >= 30, summing the geometric series."""
    out = np.zeros_like(x)
    for j in (1, 2, 3):
        e = np.exp(-j * x)
        if k == 1:
            out += e * (x / j + 1.0 / j**2)
        else:
            out += e * (x * x / j + 2.0 * x / j**2 + 2.0 / j**3)
    return out


def _check_k(k: int) -> None:
    if k not in (1, 2):
        raise ValueError(f"only k = 1, 2 are supported, got {k}")


def _dk_positive_gl(k: int, a: np.ndarray, spec: QuadratureSpec):
    """D_k(a) for a > 0 with the fixed Gauss-Legendre rule."""
    out = np.empty_like(a)
    err = np.zeros_like(a)
    low = a <= GL_CUTOFF
    if np.any(low):
        x = a[low]
        integral, e = fixed_gl_scaled(lambda t: _integrand(k, t), x, spec.max_nodes)
        out[low] = k * integral / x**k
        err[low] = k * e / x**k
    if np.any(~low):
        x = a[~low]
        out[~low] = k * (_FULL_INTEGRAL[k] - _tail(k, x)) / x**k
    if np.any(err > spec.abs_error_target):
        worst = float(err.max())
        raise QuadratureNotConverged(
            f"Debye D_{k}: error estimate {worst:.3g} exceeds {spec.abs_error_target:.3g}",
            error=worst,
        )
    return out


def _dk_adaptive(k: int, theta: float, spec: QuadratureSpec) -> float:
    """Direct signed-interval quadrature, no reflection."""
    limit = max(1, spec.max_nodes // 21)
    val, err = integrate.quad(
        lambda t: float(_integrand(k, t)), 0.0, theta,
        epsabs=spec.abs_error_target * abs(theta) ** k / k, epsrel=0.0, limit=limit,
    )
    scaled_err = k * err / abs(theta) ** k
    if scaled_err > spec.abs_error_target:
        raise QuadratureNotConverged(
            f"adaptive Debye D_{k}({theta}) reached only {scaled_err:.3g}", error=scaled_err
        )
    return k * val / theta**k


def debye_dk(k: int, theta, q: QuadratureSpec = DEFAULT_SPEC):
    """Evaluate D*_k(theta) elementwise; D*_k(0) = 1."""
    _check_k(k)
    th = np.asarray(theta, float)
    scalar = th.ndim == 0
    th = np.atleast_1d(th)
    a = np.abs(th)
    small = a < SMALL_THETA
    out = np.empty_like(th)
    # Taylor branch: 1 - k t / (2 (k + 1)) + k t^2 / (12 (k + 2))
    ts = th[small]
    out[small] = 1.0 - k * ts / (2.0 * (k + 1)) + k * ts * ts / (12.0 * (k + 2))
    rest = ~small
    if np.any(rest):
        if q.rule is Rule.ADAPTIVE:
            out[rest] = [_dk_adaptive(k, float(t), q) for t in th[rest]]
        else:
            pos = _dk_positive_gl(k, a[rest], q)
            reflect = np.where(th[rest] < 0, k * a[rest] / (k + 1.0), 0.0)
            out[rest] = pos + reflect
    return float(out[0]) if scalar else out


def _odd(theta, small_series, moderate, large):
    th = np.asarray(theta, float)
    scalar = th.ndim == 0
    th = np.atleast_1d(th)
    a = np.abs(th)
    out = np.empty_like(a)
    small = a < SMALL_THETA
    big = a > GL_CUTOFF
    mid = ~small & ~big
    out[small] = small_series(a[small])
    if np.any(mid):
        out[mid] = moderate(a[mid])
    if np.any(big):
        out[big] = large(a[big])
    out = np.sign(th) * out
    return float(out[0]) if scalar else out


def _tau_moderate(a):
    integral, _ = fixed_gl_scaled(_q, a, DEFAULT_SPEC.max_nodes)
    return 4.0 * integral / (a * a)


def _rho_moderate(a):
    integral, _ = fixed_gl_scaled(lambda t: _q(t) * (2.0 * t - a[:, None]), a, DEFAULT_SPEC.max_nodes)
    return 12.0 * integral / a**3


def tau_of_theta(theta):
    """Kendall's tau of the Frank copula, 1 - (4/theta)(1 - D_1(theta)); odd in theta."""
    return _odd(
        theta,
        lambda a: a / 9.0 - a**3 / 900.0,
        _tau_moderate,
        lambda a: 1.0 - 4.0 / a * (1.0 - debye_dk(1, a)),
    )


def rho_of_theta(theta):
    """Spearman's rho of the Frank copula, 1 - (12/theta)(D_1 - D_2); odd in theta."""
    return _odd(
        theta,
        lambda a: a / 6.0 - a**3 / 450.0,
        _rho_moderate,
        lambda a: 1.0 - 12.0 / a * (debye_dk(1, a) - debye_dk(2, a)),
    )
