"""Vectorised bracketing root finder.

Chandrupatla's method: inverse quadratic interpolation when the last three
iterates make it safe, bisection otherwise.  Every lane of the input arrays
is an independent problem.  The objective is called only on active lanes as
``f(x, idx)``, where ``idx`` indexes the lanes being evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = np.finfo(float).eps


@dataclass
class BracketSolution:
    x: np.ndarray
    fx: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray


def chandrupatla(f, a, b, fa, fb, ftol=0.0, xtol=1e-14, maxiter=200) -> BracketSolution:
    """Solve f(x) = 0 on brackets [a, b] where sign(fa) != sign(fb).

    Stops a lane once |f| <= ftol or the bracket has shrunk to
    ``xtol + 4 eps |x|``.
    """
    x1 = np.array(b, float, copy=True)
    f1 = np.array(fb, float, copy=True)
    x2 = np.array(a, float, copy=True)
    f2 = np.array(fa, float, copy=True)
    x3 = x2.copy()
    f3 = f2.copy()
    n = x1.size
    if np.any(np.sign(f1) * np.sign(f2) > 0):
        raise ValueError("every lane needs a sign change across its bracket")

    xm = np.where(np.abs(f1) <= np.abs(f2), x1, x2)
    fm = np.where(np.abs(f1) <= np.abs(f2), f1, f2)
    iters = np.zeros(n, int)
    done = (fm == 0) | (np.abs(fm) <= ftol)
    t = np.full(n, 0.5)

    for _ in range(maxiter):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        xt = x1[act] + t[act] * (x2[act] - x1[act])
        ft = np.asarray(f(xt, act), float)
        iters[act] += 1

        same = np.sign(ft) == np.sign(f1[act])
        # when ft shares f1's sign, x1 is discarded into x3; otherwise x2 is
        nx3 = np.where(same, x1[act], x2[act])
        nf3 = np.where(same, f1[act], f2[act])
        nx2 = np.where(same, x2[act], x1[act])
        nf2 = np.where(same, f2[act], f1[act])
        x3[act], f3[act] = nx3, nf3
        x2[act], f2[act] = nx2, nf2
        x1[act], f1[act] = xt, ft

        better = np.abs(f1[act]) < np.abs(f2[act])
        xm[act] = np.where(better, x1[act], x2[act])
        fm[act] = np.where(better, f1[act], f2[act])

        width = np.abs(x2[act] - x1[act])
        tol = 4 * EPS * np.abs(xm[act]) + xtol
        with np.errstate(divide="ignore", invalid="ignore"):
            tlim = tol / width
        fin = (fm[act] == 0) | (np.abs(fm[act]) <= ftol) | (tlim > 0.5)
        done[act] = fin

        xa1, xa2, xa3 = x1[act], x2[act], x3[act]
        fa1, fa2, fa3 = f1[act], f2[act], f3[act]
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = (xa1 - xa2) / (xa3 - xa2)
            phi = (fa1 - fa2) / (fa3 - fa2)
            iqi = (phi * phi < xi) & ((1 - phi) ** 2 < 1 - xi)
            tq = (fa1 / (fa2 - fa1)) * (fa3 / (fa2 - fa3)) + (
                (xa3 - xa1) / (xa2 - xa1)
            ) * (fa1 / (fa3 - fa1)) * (fa2 / (fa3 - fa2))
        tn = np.where(iqi & np.isfinite(tq), tq, 0.5)
        tlim = np.minimum(np.nan_to_num(tlim, nan=0.5, posinf=0.5), 0.5)
        t[act] = np.clip(tn, tlim, 1 - tlim)

    lo = np.minimum(x1, x2)
    hi = np.maximum(x1, x2)
    return BracketSolution(xm, fm, lo, hi, iters, done)


def expand_upward(f, start, f_start, first, limit, idx=None):
    """Geometric bracket search on (start, limit].

    Each lane starts at ``start`` with value ``f_start`` (assumed non-zero)
    and tries ``first, 2 first, 4 first, ...`` capped at ``limit`` until the
    sign of f changes.  Returns (lo, flo, hi, fhi, found).
    """
    lo = np.array(start, float, copy=True)
    flo = np.array(f_start, float, copy=True)
    n = lo.size
    hi = np.full(n, float(first))
    idx = np.arange(n) if idx is None else np.asarray(idx)
    fhi = np.asarray(f(hi, idx), float).copy()
    found = np.sign(fhi) != np.sign(flo)
    while True:
        act = np.flatnonzero(~found & (hi < limit))
        if act.size == 0:
            break
        lo[act] = hi[act]
        flo[act] = fhi[act]
        hi[act] = np.minimum(2.0 * hi[act], limit)
        fhi[act] = f(hi[act], idx[act])
        found[act] = np.sign(fhi[act]) != np.sign(flo[act])
    return lo, flo, hi, fhi, found
