"""Point estimators of the Frank association parameter.

* ``mle_estimate``: root of the likelihood equation H(theta) = 0, where
  H is the mean per-observation score.
* ``mme_tau_estimate`` / ``mme_rho_estimate``: invert the population
  Kendall tau / Spearman rho at the sample value.

Each estimator exists in two forms.  A batch form works on (L, n) arrays and
solves all L problems in lockstep, which the simulation engine relies on.
A scalar form takes one BivariateSample and returns an EstimateResult.
The scalar form is the batch form with L = 1.

Negative-side problems are solved by reflecting the sample (u2 -> 1 - u2),
solving on the positive side and negating.  Flip equivariance therefore
holds by construction, up to the rounding of 1 - (1 - u2).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import kendalltau, rankdata

from .copula import THETA_MAX, BivariateSample, ThetaLike, log_pdf_kernel, score_kernel, theta_value
from .debye import rho_of_theta, tau_of_theta
from .errors import BoundaryValue, DegenerateSample, MomentOutOfRange, NoBracket
from .rootfind import chandrupatla, expand_upward

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
FIRST_STEP = 1e-3
SCAN_STEP = 0.5
SCAN_MIN_HALFWIDTH = 20.0
ZERO_MOMENT = 1e-12
MAX_ITER = 200


class Method(str, enum.Enum):
    ML = "ML"
    MM1 = "MM1"
    MM2 = "MM2"


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: float
    method: Method
    iterations: int
    residual: float
    bracket: tuple[float, float]
    independence_flag: bool = False
    multiplicity_warning: bool = False

    @property
    def flags(self) -> str:
        out = []
        if self.independence_flag:
            out.append("independence")
        if self.multiplicity_warning:
            out.append("multiple-roots")
        return ";".join(out)


@dataclass(frozen=True)
class RawBivariateData:
    """Paired observations on an arbitrary scale."""

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        x1 = np.asarray(self.x1, float).ravel()
        x2 = np.asarray(self.x2, float).ravel()
        if x1.shape != x2.shape:
            raise ValueError("x1 and x2 must have equal length")
        if x1.size < 2:
            raise ValueError("need at least two observations")
        if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
            raise ValueError("missing or non-finite values are not allowed")
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)


@dataclass
class BatchEstimates:
    """Vectorised estimator output; one entry per sample row."""

    theta_hat: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    independence: np.ndarray
    failed: np.ndarray
    multiple: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.multiple is None:
            self.multiple = np.zeros_like(self.failed)


# ---------------------------------------------------------------------------
# Pseudo-observations and rank statistics
# ---------------------------------------------------------------------------


def ecdf_transform(x, mode: str = "adjusted") -> np.ndarray:
    """Empirical-cdf transform of one coordinate using midranks.

    ``raw`` gives rank/n, which reaches 1 at the maximum.  ``adjusted``
    gives (rank + 0.5)/(n + 1), which stays strictly inside (0, 1).
    """
    x = np.asarray(x, float).ravel()
    n = x.size
    r = rankdata(x, method="average")
    if mode == "raw":
        return r / n
    if mode == "adjusted":
        return (r + 0.5) / (n + 1.0)
    raise ValueError(f"mode must be 'raw' or 'adjusted', got {mode!r}")


def pseudo_observations(data: RawBivariateData, mode: str = "adjusted") -> BivariateSample:
    u1 = ecdf_transform(data.x1, mode)
    u2 = ecdf_transform(data.x2, mode)
    if mode == "raw" and (np.any(u1 >= 1) or np.any(u2 >= 1)):
        raise BoundaryValue("raw pseudo-observations reach 1 at the sample maximum; use mode='adjusted'")
    return BivariateSample(u1, u2)


def _kendall_rows(u1: np.ndarray, u2: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Sample tau per row: pair (k, l), k < l, scores +1 when U_k <= U_l else -1, per axis."""
    L, n = u1.shape
    iu = np.triu_indices(n, 1)
    out = np.empty(L)
    for s in range(0, L, chunk):
        a = u1[s : s + chunk]
        b = u2[s : s + chunk]
        s1 = np.where(a[:, :, None] <= a[:, None, :], 1, -1)[:, iu[0], iu[1]]
        s2 = np.where(b[:, :, None] <= b[:, None, :], 1, -1)[:, iu[0], iu[1]]
        out[s : s + chunk] = (s1 * s2).sum(axis=1) / iu[0].size
    return out


def _spearman_rows(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    n = u1.shape[1]
    d = rankdata(u1, axis=1) - rankdata(u2, axis=1)
    return 1.0 - 6.0 * (d * d).sum(axis=1) / (n * (n * n - 1.0))


def _check_n(s: BivariateSample) -> None:
    if s.n < 2:
        raise ValueError("estimation needs n >= 2")


BRUTE_FORCE_KENDALL_MAX_N = 2000


def kendall_tau_hat(s: BivariateSample) -> float:
    """Sample tau with equality scored +1.

    Without ties this is the ordinary tau-a, so large tie-free samples use
    scipy's O(n log n) routine; otherwise every pair is scored explicitly.
    """
    _check_n(s)
    if s.n > BRUTE_FORCE_KENDALL_MAX_N:
        if np.unique(s.u1).size == s.n and np.unique(s.u2).size == s.n:
            return float(kendalltau(s.u1, s.u2).statistic)
        raise ValueError(f"tied samples larger than {BRUTE_FORCE_KENDALL_MAX_N} are not supported")
    return float(_kendall_rows(s.u1[None, :], s.u2[None, :])[0])


def spearman_rho_hat(s: BivariateSample) -> float:
    _check_n(s)
    return float(_spearman_rows(s.u1[None, :], s.u2[None, :])[0])


# ---------------------------------------------------------------------------
# Likelihood and the normal equation
# ---------------------------------------------------------------------------


def _h_rows(u1, u2, theta):
    """H(theta_i) for each row i; theta = 0 gives the independence limit."""
    return score_kernel(u1, u2, np.asarray(theta, float)[:, None]).mean(axis=1)


def _h_zero_rows(u1, u2):
    return 0.5 - u1.mean(axis=1) - u2.mean(axis=1) + 2.0 * (u1 * u2).mean(axis=1)


def h_of_theta(s: BivariateSample, theta: float) -> float:
    """H(theta) = (1/n) sum_j d/dtheta log c(U_j | theta)."""
    t = theta_value(theta)
    return float(_h_rows(s.u1[None, :], s.u2[None, :], np.array([t]))[0])


def h_at_zero_limit(s: BivariateSample) -> float:
    """lim_{theta -> 0} H(theta) = 1/2 - (mean U1 + mean U2) + 2 mean(U1 U2)."""
    return float(_h_zero_rows(s.u1[None, :], s.u2[None, :])[0])


def log_likelihood(s: BivariateSample, theta: ThetaLike) -> float:
    t = theta_value(theta)
    if t == 0.0:
        return 0.0
    return float(np.sum(log_pdf_kernel(s.u1, s.u2, t)))


# ---------------------------------------------------------------------------
# Maximum likelihood
# ---------------------------------------------------------------------------


def _solve_positive(f, f0, tol, idx_count):
    """Root of f on (0, THETA_MAX] for lanes whose value at 0 is ``f0`` > 0."""
    lo, flo, hi, fhi, found = expand_upward(
        f, np.zeros(idx_count), f0, FIRST_STEP, THETA_MAX
    )
    x = np.where(found, np.nan, hi)
    fx = np.where(found, np.nan, fhi)
    iters = np.zeros(idx_count, int)
    blo, bhi = lo.copy(), hi.copy()
    ok = np.flatnonzero(found)
    if ok.size:
        sol = chandrupatla(
            lambda xs, act: f(xs, ok[act]),
            lo[ok], hi[ok], flo[ok], fhi[ok],
            ftol=tol * 1e-2, xtol=1e-13, maxiter=MAX_ITER,
        )
        x[ok], fx[ok], iters[ok] = sol.x, sol.fx, sol.iterations
        blo[ok], bhi[ok] = sol.lo, sol.hi
    return x, fx, iters, blo, bhi, found


def _scan_extra_roots(u1, u2, theta_hat, rows):
    """Count H sign changes on a step-SCAN_STEP grid over [-W, W], W = max(20, 2|theta_hat|).

    Returns a boolean per row: True when more than one sign change exists.
    Each row is evaluated only on its own window.
    """
    extra = np.zeros(u1.shape[0], bool)
    if rows.size == 0:
        return extra
    w = np.minimum(THETA_MAX, np.maximum(SCAN_MIN_HALFWIDTH, 2.0 * np.abs(theta_hat[rows])))
    k = np.ceil(float(w.max()) / SCAN_STEP)
    grid = np.arange(-k, k + 1) * SCAN_STEP
    prev = np.full(rows.size, np.nan)
    changes = np.zeros(rows.size, int)
    for g in grid:
        act = np.flatnonzero(np.abs(g) <= w + 1e-12)
        if act.size == 0:
            continue
        a, b = u1[rows[act]], u2[rows[act]]
        val = _h_zero_rows(a, b) if g == 0.0 else _h_rows(a, b, np.full(act.size, g))
        sgn = np.sign(val)
        changes[act] += (sgn * prev[act] < 0).astype(int)
        prev[act] = sgn
    extra[rows] = changes > 1
    return extra


def mle_batch(u1: np.ndarray, u2: np.ndarray, tol: float = DEFAULT_TOL, scan: bool = True) -> BatchEstimates:
    """Maximum likelihood for each row of (L, n) arrays."""
    u1 = np.asarray(u1, float)
    u2 = np.asarray(u2, float)
    L = u1.shape[0]
    h0 = _h_zero_rows(u1, u2)
    neg = h0 < 0
    v2 = np.where(neg[:, None], 1.0 - u2, u2)
    g0 = np.abs(h0)
    independence = h0 == 0
    degenerate = np.all((u1 == u1[:, :1]) & (u2 == u2[:, :1]), axis=1)

    def f(x, rows):
        return _h_rows(u1[rows], v2[rows], x)

    x, fx, iters, lo, hi, found = _solve_positive(f, g0, tol, L)
    x = np.where(independence, 0.0, x)
    fx = np.where(independence, 0.0, fx)
    lo = np.where(independence, 0.0, lo)
    hi = np.where(independence, 0.0, hi)
    failed = (~found & ~independence) | degenerate
    sign = np.where(neg, -1.0, 1.0)
    theta = sign * x
    blo = np.where(neg, -hi, lo)
    bhi = np.where(neg, -lo, hi)
    # boundary estimate for failures
    theta = np.where(~found & ~independence, sign * THETA_MAX, theta)

    multiple = np.zeros(L, bool)
    if scan:
        rows = np.flatnonzero(~failed & ~independence)
        multiple = _scan_extra_roots(u1, u2, theta, rows)
    res = BatchEstimates(theta, np.abs(fx), iters, blo, bhi, independence & ~degenerate, failed, multiple)
    for r in np.flatnonzero(multiple):
        _resolve_multiple_roots(u1[r], u2[r], res, r, tol)
    return res


def _resolve_multiple_roots(a, b, res: BatchEstimates, r: int, tol: float) -> None:
    """Refine every bracketed root of H and keep the one with the largest likelihood."""
    s = BivariateSample(a, b)
    w = min(THETA_MAX, max(SCAN_MIN_HALFWIDTH, 2.0 * abs(res.theta_hat[r])))
    grid = np.arange(-np.ceil(w / SCAN_STEP), np.ceil(w / SCAN_STEP) + 1) * SCAN_STEP
    grid = grid[np.abs(grid) <= w + 1e-12]
    vals = np.array([h_at_zero_limit(s) if g == 0 else h_of_theta(s, g) for g in grid])
    candidates = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        sol = chandrupatla(
            lambda xs, act: _h_rows(a[None, :], b[None, :], xs),
            np.array([grid[i]]), np.array([grid[i + 1]]),
            np.array([vals[i]]), np.array([vals[i + 1]]),
            ftol=tol * 1e-2, xtol=1e-13, maxiter=MAX_ITER,
        )
        root = float(sol.x[0])
        candidates.append((log_likelihood(s, root), root, sol))
    if len(candidates) < 2:
        return
    log.warning("likelihood equation has %d roots; keeping the likelihood maximiser", len(candidates))
    _, root, sol = max(candidates, key=lambda c: c[0])
    res.theta_hat[r] = root
    res.residual[r] = abs(float(sol.fx[0]))
    res.iterations[r] = int(sol.iterations[0])
    res.lo[r], res.hi[r] = float(sol.lo[0]), float(sol.hi[0])
    res.multiple[r] = True


def _single(batch: BatchEstimates, method: Method, exc) -> EstimateResult:
    theta = float(batch.theta_hat[0])
    if batch.failed[0]:
        raise exc(theta)
    return EstimateResult(
        theta_hat=theta,
        method=method,
        iterations=int(batch.iterations[0]),
        residual=float(batch.residual[0]),
        bracket=(float(batch.lo[0]), float(batch.hi[0])),
        independence_flag=bool(batch.independence[0]),
        multiplicity_warning=bool(batch.multiple[0]),
    )


def mle_estimate(s: BivariateSample, tol: float = DEFAULT_TOL) -> EstimateResult:
    """theta_hat with |H(theta_hat)| <= tol.

    Raises NoBracket when H keeps its sign up to |theta| = THETA_MAX and
    DegenerateSample when all pairs coincide.
    """
    _check_n(s)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if np.all(s.u1 == s.u1[0]) and np.all(s.u2 == s.u2[0]):
        raise DegenerateSample("all pairs are identical")
    batch = mle_batch(s.u1[None, :], s.u2[None, :], tol)

    def exc(theta):
        return NoBracket(f"H(theta) has no sign change within +-{THETA_MAX}", theta)

    return _single(batch, Method.ML, exc)


# ---------------------------------------------------------------------------
# Moment estimators
# ---------------------------------------------------------------------------


def _invert_moment(moment_fn, m_hat: np.ndarray, tol: float) -> BatchEstimates:
    m_hat = np.asarray(m_hat, float)
    L = m_hat.size
    sign = np.where(m_hat < 0, -1.0, 1.0)
    target = np.abs(m_hat)
    independence = target < ZERO_MOMENT

    def f(x, rows):
        return moment_fn(x) - target[rows]

    x, fx, iters, lo, hi, found = _solve_positive(f, -target, tol, L)
    # moment_fn increases, so f(0) = -target < 0; _solve_positive only needs a sign change
    x = np.where(independence, 0.0, x)
    fx = np.where(independence, 0.0, fx)
    failed = ~found & ~independence
    theta = np.where(failed, THETA_MAX, x) * sign
    lo = np.where(independence, 0.0, lo)
    hi = np.where(independence, 0.0, hi)
    blo = np.where(sign < 0, -hi, lo)
    bhi = np.where(sign < 0, -lo, hi)
    return BatchEstimates(theta, np.abs(fx), iters, blo, bhi, independence, failed)


def mme_tau_batch(u1, u2, tol: float = DEFAULT_TOL) -> BatchEstimates:
    return _invert_moment(tau_of_theta, _kendall_rows(np.asarray(u1), np.asarray(u2)), tol)


def mme_rho_batch(u1, u2, tol: float = DEFAULT_TOL) -> BatchEstimates:
    return _invert_moment(rho_of_theta, _spearman_rows(np.asarray(u1), np.asarray(u2)), tol)


def invert_tau(tau: float, tol: float = DEFAULT_TOL) -> EstimateResult:
    """theta with tau_of_theta(theta) = tau."""
    batch = _invert_moment(tau_of_theta, np.array([tau]), tol)
    return _single(batch, Method.MM1, lambda t: MomentOutOfRange(f"|tau| = {abs(tau)} is out of reach", t))


def invert_rho(rho: float, tol: float = DEFAULT_TOL) -> EstimateResult:
    """theta with rho_of_theta(theta) = rho."""
    batch = _invert_moment(rho_of_theta, np.array([rho]), tol)
    return _single(batch, Method.MM2, lambda t: MomentOutOfRange(f"|rho| = {abs(rho)} is out of reach", t))


def mme_tau_estimate(s: BivariateSample, tol: float = DEFAULT_TOL) -> EstimateResult:
    _check_n(s)
    return invert_tau(kendall_tau_hat(s), tol)


def mme_rho_estimate(s: BivariateSample, tol: float = DEFAULT_TOL) -> EstimateResult:
    _check_n(s)
    return invert_rho(spearman_rho_hat(s), tol)


ESTIMATORS = {
    Method.ML: mle_estimate,
    Method.MM1: mme_tau_estimate,
    Method.MM2: mme_rho_estimate,
}
