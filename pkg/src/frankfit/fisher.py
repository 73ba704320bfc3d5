"""Fisher information per observation, I(theta) = I1(theta) - I2(theta).

I1(theta) = 1/theta^2 + e^theta / (e^theta - 1)^2 is closed form.
I2(theta) = 2 E[J(U1, U2 | theta)], where J = (B'^2 - B B'') / B^2 and B is
the density denominator bracket (derivatives in theta).  I2 is evaluated
either by tensor Gauss-Legendre quadrature against the density or by Monte
Carlo over exact draws.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .copula import ThetaLike, j_kernel, log_pdf_kernel, score_kernel, theta_value
from .quadrature import QuadratureSpec, Rule, integrate_unit_square
from .sampler import SeedSpec, sample_n

DEFAULT_QUADRATURE = QuadratureSpec(Rule.GAUSS_LEGENDRE, 128, 1e-8)
SMALL_THETA = 1e-3
FISHER_AT_INDEPENDENCE = 1.0 / 36.0  # Var of the score (2u1 - 1)(2u2 - 1)/2 under independence

CSV_HEADER = ("theta", "i1", "i2", "i_total", "inv_i", "method", "mc_se")


class FisherMethod(str, enum.Enum):
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class FisherResult:
    theta: float
    i1: float
    i2: float
    i_total: float
    method: FisherMethod
    mc_standard_error: float = 0.0

    @property
    def inv_i(self) -> float:
        return 1.0 / self.i_total

    def csv_row(self) -> list[str]:
        return [
            f"{self.theta:.17g}", f"{self.i1:.17g}", f"{self.i2:.17g}", f"{self.i_total:.17g}",
            f"{self.inv_i:.17g}", self.method.value, f"{self.mc_standard_error:.17g}",
        ]


def _nonzero(theta: ThetaLike) -> float:
    t = theta_value(theta)
    if t == 0.0:
        raise ValueError("theta must be non-zero; use fisher_information for the small-theta path")
    return t


def i1_term(theta: ThetaLike) -> float:
    t = abs(_nonzero(theta))
    # e^t/(e^t - 1)^2 = e^-t / (1 - e^-t)^2, which cannot overflow
    return 1.0 / (t * t) + math.exp(-t) / math.expm1(-t) ** 2


def j_ratio(u1, u2, theta: ThetaLike):
    """J1/J2 at (u1, u2); equals -(d/dtheta)^2 of the log density bracket."""
    t = _nonzero(theta)
    out = j_kernel(u1, u2, t)
    return float(out) if np.ndim(out) == 0 else out


def i2_quadrature(theta: ThetaLike, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """2 * double integral of J * c over the unit square."""
    t = _nonzero(theta)

    def integrand(a, b):
        return 2.0 * j_kernel(a, b, t) * np.exp(log_pdf_kernel(a, b, t))

    value, _ = integrate_unit_square(integrand, q)
    return value


def i2_monte_carlo(theta: ThetaLike, m: int, seed: SeedSpec) -> FisherResult:
    """2 * mean of J over m exact draws; SE is 2 * sd / sqrt(m)."""
    t = _nonzero(theta)
    if m < 1000:
        raise ValueError("m must be at least 1000")
    s = sample_n(t, m, seed)
    j = j_kernel(s.u1, s.u2, t)
    i2 = 2.0 * math.fsum(j) / m
    se = 2.0 * float(np.std(j, ddof=1)) / math.sqrt(m)
    i1 = i1_term(t)
    return FisherResult(t, i1, i2, i1 - i2, FisherMethod.MONTE_CARLO, se)


def score_variance(theta: ThetaLike, m: int, seed: SeedSpec) -> tuple[float, float]:
    """Monte Carlo Var(score) and its standard error, an independent route to I(theta)."""
    t = theta_value(theta)
    s = sample_n(t, m, seed)
    sc = score_kernel(s.u1, s.u2, t)
    c = sc - sc.mean()
    sq = c * c
    var = float(sq.mean())
    return var, float(np.std(sq, ddof=1)) / math.sqrt(m)


def fisher_information(
    theta: ThetaLike,
    method: FisherMethod | str = FisherMethod.QUADRATURE,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    m: int = 1_000_000,
    seed: SeedSpec | None = None,
) -> FisherResult:
    """I(theta) by quadrature or Monte Carlo.

    For |theta| < 1e-3 both I1 and I2 grow like 2/theta^2, so the result is
    the average of the values at +-1e-3 (reported with theta as given).
    """
    t = theta_value(theta)
    method = FisherMethod(method)
    if abs(t) < SMALL_THETA:
        lo = fisher_information(-SMALL_THETA, method, q, m, seed)
        hi = fisher_information(SMALL_THETA, method, q, m, seed)
        return FisherResult(
            t, 0.5 * (lo.i1 + hi.i1), 0.5 * (lo.i2 + hi.i2), 0.5 * (lo.i_total + hi.i_total),
            method, 0.5 * math.hypot(lo.mc_standard_error, hi.mc_standard_error),
        )
    if method is FisherMethod.MONTE_CARLO:
        return i2_monte_carlo(t, m, seed if seed is not None else SeedSpec(0))
    i1 = i1_term(t)
    i2 = i2_quadrature(t, q)
    return FisherResult(t, i1, i2, i1 - i2, method, 0.0)


def asymptotic_variance(theta: ThetaLike) -> float:
    """1 / I(theta) by quadrature."""
    return fisher_information(_nonzero(theta)).inv_i


def write_fisher_csv(rows, path, header_lines=()) -> None:
    with open(Path(path), "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(r.csv_row())
