"""Bivariate Frank copula: cdf, density, log-density, score and conditional cdf.

Every exponential bracket is evaluated after factoring out its largest term,
so nothing overflows for ``|theta| <= THETA_MAX``.  Negative ``theta`` is
mapped onto positive ``theta`` through the reflection ``u2 -> 1 - u2``:

    c(u1, u2 | -theta) = c(u1, 1 - u2 | theta)

For ``|theta| < SMALL_THETA`` the closed forms lose their digits to
cancellation, and Taylor expansions around independence are used instead.

All public functions broadcast over numpy arrays of coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

import numpy as np
from scipy.special import expit

from .errors import BoundaryValue, InvalidParameter, OverflowGuard

THETA_MAX = 700.0
SMALL_THETA = 1e-4


@dataclass(frozen=True)
class AssociationParameter:
    """The Frank association parameter, with an explicit independence limit."""

    value: float
    is_independence_limit: bool = False

    def __post_init__(self):
        v = float(self.value)
        object.__setattr__(self, "value", v)
        if not np.isfinite(v):
            raise InvalidParameter(f"theta must be finite, got {v}")
        if self.is_independence_limit:
            if v != 0.0:
                raise InvalidParameter("the independence limit carries value 0")
        elif v == 0.0:
            raise InvalidParameter("theta = 0 must be requested as the independence limit")
        if abs(v) > THETA_MAX:
            raise InvalidParameter(f"|theta| must not exceed {THETA_MAX}, got {v}")

    @classmethod
    def independence(cls) -> "AssociationParameter":
        return cls(0.0, True)

    @classmethod
    def of(cls, theta: "ThetaLike") -> "AssociationParameter":
        if isinstance(theta, cls):
            return theta
        theta = float(theta)
        return cls.independence() if theta == 0.0 else cls(theta)

    def __float__(self) -> float:
        return self.value


ThetaLike = Union[float, int, AssociationParameter]


def theta_value(theta: ThetaLike) -> float:
    """Return ``theta`` as a float, 0.0 standing for the independence limit."""
    t = float(theta.value) if isinstance(theta, AssociationParameter) else float(theta)
    if not np.isfinite(t):
        raise InvalidParameter(f"theta must be finite, got {t}")
    if abs(t) > THETA_MAX:
        raise OverflowGuard(f"|theta| = {abs(t)} exceeds THETA_MAX = {THETA_MAX}")
    return t


@dataclass(frozen=True)
class UnitPair:
    """One observation in the open unit square."""

    u1: float
    u2: float

    def __post_init__(self):
        for name in ("u1", "u2"):
            x = float(getattr(self, name))
            if not 0.0 < x < 1.0:
                raise BoundaryValue(f"{name} must lie in (0, 1), got {x}")
            object.__setattr__(self, name, x)

    def __iter__(self) -> Iterator[float]:
        yield self.u1
        yield self.u2


class BivariateSample:
    """An ordered sample of ``n`` pairs in (0,1)^2, stored as two float arrays."""

    __slots__ = ("u1", "u2")

    def __init__(self, u1, u2):
        u1 = np.array(u1, dtype=float).ravel()
        u2 = np.array(u2, dtype=float).ravel()
        if u1.shape != u2.shape:
            raise ValueError(f"coordinate lengths differ: {u1.size} vs {u2.size}")
        if u1.size == 0:
            raise ValueError("a sample needs at least one pair")
        _require_interior(u1, u2)
        u1.flags.writeable = False
        u2.flags.writeable = False
        self.u1 = u1
        self.u2 = u2

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "BivariateSample":
        arr = np.array([tuple(p) for p in pairs], dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("pairs must be a sequence of (u1, u2)")
        return cls(arr[:, 0], arr[:, 1])

    @property
    def n(self) -> int:
        return int(self.u1.size)

    @property
    def pairs(self) -> list[UnitPair]:
        return [UnitPair(a, b) for a, b in zip(self.u1, self.u2)]

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[UnitPair]:
        return iter(self.pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BivariateSample):
            return NotImplemented
        return np.array_equal(self.u1, other.u1) and np.array_equal(self.u2, other.u2)

    def __repr__(self) -> str:
        return f"BivariateSample(n={self.n})"

    def flip(self) -> "BivariateSample":
        """Reflect the second coordinate, which negates theta."""
        return BivariateSample(self.u1, 1.0 - self.u2)

    def sorted(self) -> "BivariateSample":
        order = np.lexsort((self.u2, self.u1))
        return BivariateSample(self.u1[order], self.u2[order])

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.u1, self.u2])


def _require_interior(u1, u2) -> None:
    u1 = np.asarray(u1)
    u2 = np.asarray(u2)
    if not (np.all(u1 > 0) and np.all(u1 < 1) and np.all(u2 > 0) and np.all(u2 < 1)):
        raise BoundaryValue("coordinates must lie strictly inside (0, 1)")


# ---------------------------------------------------------------------------
# Kernels.  They take theta as an array broadcastable against the coordinates,
# perform no validation, and are shared with the vectorised estimators.
# ---------------------------------------------------------------------------


def _orient(u2, theta):
    """Map negative theta onto positive theta by reflecting ``u2``."""
    neg = theta < 0
    return np.where(neg, 1.0 - u2, u2), np.abs(theta), neg


def _bracket_terms(u1, u2, t):
    """Factored density bracket for ``t > 0``.

    With m = min(u1, u2), M = max(u1, u2):

        e^{-t u1} + e^{-t u2} - e^{-t} - e^{-t(u1+u2)} = e^{-t m} * b
        b = (1 - e^{-t M}) + e^{-t (M - m)} (1 - e^{-t (1 - M)})

    Both summands of b are non-negative, so b carries no cancellation.
    Returns (m, M, b, b', b'') with derivatives taken in t.
    """
    m = np.minimum(u1, u2)
    M = np.maximum(u1, u2)
    d = M - m
    eM = np.exp(-t * M)
    ed = np.exp(-t * d)
    e1m = np.exp(-t * (1.0 - m))
    b = -np.expm1(-t * M) - ed * np.expm1(-t * (1.0 - M))
    db = M * eM - d * ed + (1.0 - m) * e1m
    d2b = -M * M * eM + d * d * ed - (1.0 - m) ** 2 * e1m
    return m, M, b, db, d2b


def _log1mexp(t):
    """log(1 - e^{-t}) for t > 0."""
    return np.log(-np.expm1(-t))


def _small_log_pdf(u1, u2, t):
    c1 = 0.5 * (2 * u1 - 1) * (2 * u2 - 1)
    q = u1 * u2 * (1 - u1) * (1 - u2)
    c2 = q - 1.0 / 24.0
    c3 = q * (2 * u1 - 1) * (2 * u2 - 1) / 6.0
    return t * (c1 + t * (c2 + t * c3))


def _small_score(u1, u2, t):
    c1 = 0.5 * (2 * u1 - 1) * (2 * u2 - 1)
    q = u1 * u2 * (1 - u1) * (1 - u2)
    c2 = q - 1.0 / 24.0
    c3 = q * (2 * u1 - 1) * (2 * u2 - 1) / 6.0
    return c1 + t * (2 * c2 + t * 3 * c3)


def log_pdf_kernel(u1, u2, theta):
    u1, u2, theta = np.broadcast_arrays(
        np.asarray(u1, float), np.asarray(u2, float), np.asarray(theta, float)
    )
    small = np.abs(theta) < SMALL_THETA
    v2, t, _ = _orient(u2, theta)
    t = np.where(small, 1.0, t)
    m, M, b, _, _ = _bracket_terms(u1, v2, t)
    big = np.log(t) + _log1mexp(t) - t * (M - m) - 2.0 * np.log(b)
    return np.where(small, _small_log_pdf(u1, u2, theta), big)


def score_kernel(u1, u2, theta):
    u1, u2, theta = np.broadcast_arrays(
        np.asarray(u1, float), np.asarray(u2, float), np.asarray(theta, float)
    )
    small = np.abs(theta) < SMALL_THETA
    v2, t, neg = _orient(u2, theta)
    t = np.where(small, 1.0, t)
    m, M, b, db, _ = _bracket_terms(u1, v2, t)
    big = 1.0 / t + 1.0 / np.expm1(t) - (M - m) - 2.0 * db / b
    big = np.where(neg, -big, big)
    return np.where(small, _small_score(u1, u2, theta), big)


def j_kernel(u1, u2, theta):
    """J = J1/J2 = -(d/dtheta)^2 log(bracket); finite for theta != 0."""
    u1, u2, theta = np.broadcast_arrays(
        np.asarray(u1, float), np.asarray(u2, float), np.asarray(theta, float)
    )
    v2, t, _ = _orient(u2, theta)
    _, _, b, db, d2b = _bracket_terms(u1, v2, t)
    return (db * db - d2b * b) / (b * b)


def _log_abs_expm1(x):
    """log|e^x - 1| without overflow, for x != 0."""
    x = np.asarray(x, float)
    pos = x > 0
    xa = np.where(pos, x, -x)
    core = np.log(-np.expm1(-xa))
    return np.where(pos, xa + core, core)


def conditional_cdf_kernel(u2, u1, theta):
    u1, u2, theta = np.broadcast_arrays(
        np.asarray(u1, float), np.asarray(u2, float), np.asarray(theta, float)
    )
    small = np.abs(theta) < SMALL_THETA
    t = np.where(small, 1.0, theta)
    # h = X / (X + Y), X = e^{-t u1}(1 - e^{-t u2}), Y = e^{-t u2} - e^{-t}
    z = -t * (u1 - u2) + _log_abs_expm1(-t * u2) - _log_abs_expm1(-t * (1.0 - u2))
    series = u2 + theta * (
        0.5 * u2 * (2 * u1 - 1) * (u2 - 1)
        + theta * u2 * (u2 - 1) * (2 * u2 - 1) * (6 * u1 * u1 - 6 * u1 + 1) / 12.0
    )
    return np.where(small, series, expit(z))


def _cdf_kernel(u1, u2, theta):
    u1, u2, theta = np.broadcast_arrays(
        np.asarray(u1, float), np.asarray(u2, float), np.asarray(theta, float)
    )
    small = np.abs(theta) < SMALL_THETA
    v2, t, neg = _orient(u2, theta)
    t = np.where(small, 1.0, t)
    m, _, b, _, _ = _bracket_terms(u1, v2, t)
    with np.errstate(divide="ignore"):
        pos = m - (np.log(b) - _log1mexp(t)) / t
    big = np.where(neg, u1 - pos, pos)
    q = u1 * u2 * (1 - u1) * (1 - u2)
    series = u1 * u2 + theta * (0.5 * q + theta * q * (2 * u1 - 1) * (2 * u2 - 1) / 12.0)
    out = np.where(small, series, big)
    # exact boundary values, then Frechet bounds against rounding
    out = np.where((u1 == 0) | (u2 == 0), 0.0, out)
    out = np.where(u1 == 1, u2, out)
    out = np.where(u2 == 1, u1, out)
    return np.clip(out, np.maximum(u1 + u2 - 1.0, 0.0), np.minimum(u1, u2))


def _scalarize(x):
    return float(x) if np.ndim(x) == 0 else x


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def frank_cdf(u1, u2, theta: ThetaLike):
    """Copula cdf C(u1, u2 | theta); coordinates may sit on the closed square."""
    t = theta_value(theta)
    u1 = np.asarray(u1, float)
    u2 = np.asarray(u2, float)
    if np.any((u1 < 0) | (u1 > 1) | (u2 < 0) | (u2 > 1)):
        raise BoundaryValue("cdf coordinates must lie in [0, 1]")
    if t == 0.0:
        return _scalarize(u1 * u2)
    return _scalarize(_cdf_kernel(u1, u2, t))


def frank_log_pdf(u1, u2, theta: ThetaLike):
    """Log-density of a single observation."""
    t = theta_value(theta)
    _require_interior(u1, u2)
    if t == 0.0:
        return _scalarize(np.zeros(np.broadcast(np.asarray(u1), np.asarray(u2)).shape))
    out = log_pdf_kernel(u1, u2, t)
    if not np.all(np.isfinite(out)):
        raise OverflowGuard(f"non-finite log-density at theta={t}")
    return _scalarize(out)


def frank_pdf(u1, u2, theta: ThetaLike):
    """Copula density c(u1, u2 | theta), evaluated as exp of the stable log-density."""
    out = np.exp(frank_log_pdf(u1, u2, theta))
    if not np.all(np.isfinite(out)):
        raise OverflowGuard("density overflowed")
    return _scalarize(out)


def score_single(u1, u2, theta: ThetaLike):
    """d/dtheta log c(u1, u2 | theta) for one observation.

    At the independence limit this returns (1 - 2 u1)(1 - 2 u2) / 2.
    """
    t = theta_value(theta)
    _require_interior(u1, u2)
    return _scalarize(score_kernel(u1, u2, t))


def conditional_cdf(u2, u1, theta: ThetaLike):
    """P(U2 <= u2 | U1 = u1), i.e. dC/du1."""
    t = theta_value(theta)
    u1 = np.asarray(u1, float)
    u2 = np.asarray(u2, float)
    if np.any((u1 <= 0) | (u1 >= 1)):
        raise BoundaryValue("u1 must lie in (0, 1)")
    if np.any((u2 < 0) | (u2 > 1)):
        raise BoundaryValue("u2 must lie in [0, 1]")
    if t == 0.0:
        return _scalarize(np.broadcast_arrays(u2, u1)[0].copy())
    out = conditional_cdf_kernel(u2, u1, t)
    out = np.where(u2 == 0, 0.0, np.where(u2 == 1, 1.0, out))
    return _scalarize(out)
