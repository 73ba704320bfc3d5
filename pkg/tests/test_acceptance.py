"""Acceptance criteria, each checked at its stated tolerance.

Every test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are repeated in the terminal summary.  Monte Carlo checks use base
seed 12345, fixed before any result was inspected.
"""

import time

import numpy as np

from frankfit import estimators as est
from frankfit.copula import BivariateSample, conditional_cdf, frank_pdf
from frankfit.datasets import reference_sample
from frankfit.debye import debye_dk, rho_of_theta, tau_of_theta
from frankfit.estimators import Method
from frankfit.fisher import fisher_information, i2_monte_carlo, i2_quadrature, score_variance
from frankfit.quadrature import QuadratureSpec, Rule, integrate_unit_square
from frankfit.sampler import SeedSpec, sample_arrays, sample_n, sample_with_latent
from frankfit.simstudy import SimulationCell, cell_estimates, standard_grid, relative_difference, run_cell

SEED = 12345
L_FULL = 20_000
TOL = 1e-8

_cells = {}


def cell(n, theta):
    key = (n, theta)
    if key not in _cells:
        _cells[key] = run_cell(SimulationCell(n, theta, L_FULL, SeedSpec(SEED)))
    return _cells[key]


def within(value, target, tol):
    return abs(value - target) <= tol


def test_criterion_01_table_cell_n25_theta1(criterion):
    row = cell(25, 1.0)
    checks = [
        ("Bias-ML", row[Method.ML].bias, 0.045, 0.028),
        ("MSE-ML", row[Method.ML].mse, 1.729, 0.06),
        ("Bias-MM1", row[Method.MM1].bias, -0.534, 0.028),
        ("MSE-MM1", row[Method.MM1].mse, 1.449, 0.06),
        ("Bias-MM2", row[Method.MM2].bias, -0.568, 0.03),
        ("MSE-MM2", row[Method.MM2].mse, 1.428, 0.06),
    ]
    results = []
    for name, got, want, tol in checks:
        ok = within(got, want, tol)
        results.append(ok)
        criterion(1, ok, f"{name} = {got:.4f}, target {want} +- {tol}")
    assert all(results)


def test_criterion_02_table_cell_n25_theta10(criterion):
    row = cell(25, 10.0)
    a = within(row[Method.MM1].bias, -6.456, 0.1)
    criterion(2, a, f"Bias-MM1 = {row[Method.MM1].bias:.4f}, target -6.456 +- 0.1")
    b = within(row[Method.ML].mse, 5.287, 0.25)
    criterion(2, b, f"MSE-ML = {row[Method.ML].mse:.4f}, target 5.287 +- 0.25")
    assert a and b


def test_criterion_03_relative_difference(criterion):
    rd = {}
    for n in (25, 50, 75, 100):
        rd[(n, 5.0)] = relative_difference(cell(n, 5.0), fisher_information(5.0).inv_i)
    rd[(100, 1.0)] = relative_difference(cell(100, 1.0), fisher_information(1.0).inv_i)
    a = within(rd[(25, 5.0)], 0.147, 0.02)
    criterion(3, a, f"RD(25,5) = {rd[(25, 5.0)]:.4f}, target 0.147 +- 0.02")
    b = within(rd[(100, 1.0)], 0.041, 0.02)
    criterion(3, b, f"RD(100,1) = {rd[(100, 1.0)]:.4f}, target 0.041 +- 0.02")
    seq = [rd[(n, 5.0)] for n in (25, 50, 75, 100)]
    c = all(x > y for x, y in zip(seq, seq[1:]))
    criterion(3, c, "RD(n,5) for n=25,50,75,100: " + ", ".join(f"{x:.4f}" for x in seq) + " (must decrease)")
    assert a and b and c


def test_criterion_04_density_normalisation(criterion):
    spec = QuadratureSpec(Rule.GAUSS_LEGENDRE, 128, 1e-8)
    start = time.perf_counter()
    worst = 0.0
    for theta in (-10, -1, 0.1, 5, 10):
        val, _ = integrate_unit_square(lambda a, b: frank_pdf(a, b, theta), spec)
        worst = max(worst, abs(val - 1))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 5
    criterion(4, ok, f"max |integral - 1| = {worst:.2e} (< 1e-8), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_criterion_05_sampler_roundtrip(criterion):
    worst = 0.0
    for k, theta in enumerate((-8, -1, 1, 8)):
        s, v = sample_with_latent(theta, 10_000, SeedSpec(SEED, k))
        worst = max(worst, float(np.max(np.abs(conditional_cdf(s.u2, s.u1, theta) - v))))
    ok = worst < 1e-10
    criterion(5, ok, f"max |h(u2|u1) - v| = {worst:.2e} (< 1e-10)")
    assert ok


def test_criterion_06_moment_maps(criterion):
    s = sample_n(5.0, 200_000, SeedSpec(SEED))
    dt = abs(est.kendall_tau_hat(s) - tau_of_theta(5.0))
    dr = abs(est.spearman_rho_hat(s) - rho_of_theta(5.0))
    ok = dt <= 0.01 and dr <= 0.01
    criterion(6, ok, f"|tau_emp - tau(5)| = {dt:.2e}, |rho_emp - rho(5)| = {dr:.2e} (<= 0.01)")
    assert ok


def test_criterion_07_debye_reflection(criterion):
    # D_k(-theta) by direct adaptive quadrature over the signed interval, no reflection used
    adaptive = QuadratureSpec(Rule.ADAPTIVE, 21 * 50, 1e-12)
    worst = 0.0
    for k in (1, 2):
        for theta in (0.5, 2.0, 10.0):
            gap = debye_dk(k, -theta, adaptive) - debye_dk(k, theta) - k * theta / (k + 1)
            worst = max(worst, abs(gap))
    ok = worst < 1e-10
    criterion(7, ok, f"max reflection gap = {worst:.2e} (< 1e-10)")
    assert ok


def test_criterion_08_fisher_cross_method(criterion):
    results = []
    for k, theta in enumerate((1.0, 5.0, 10.0)):
        mc = i2_monte_carlo(theta, 1_000_000, SeedSpec(SEED, 100 + k))
        quad = i2_quadrature(theta)
        ok = abs(quad - mc.i2) <= 3 * mc.mc_standard_error
        results.append(ok)
        criterion(8, ok, f"I2({theta:g}) quad {quad:.6f} vs MC {mc.i2:.6f}, {abs(quad - mc.i2) / mc.mc_standard_error:.2f} SE")
    for k, theta in enumerate((1.0, 5.0)):
        var, se = score_variance(theta, 1_000_000, SeedSpec(SEED, 200 + k))
        info = fisher_information(theta).i_total
        ok = abs(var - info) <= 3 * se
        results.append(ok)
        criterion(8, ok, f"Var(score) at {theta:g}: {var:.6f} vs I = {info:.6f}, {abs(var - info) / se:.2f} SE")
    a, b = fisher_information(2.0).i_total, fisher_information(-2.0).i_total
    ok = abs(a - b) / a < 1e-6
    results.append(ok)
    criterion(8, ok, f"evenness |I(2) - I(-2)|/I(2) = {abs(a - b) / a:.1e}")
    assert all(results)


def test_criterion_09_flip_equivariance(criterion):
    worst = {m: 0.0 for m in Method}
    skipped = 0
    for k in range(100):
        s = sample_n(3.0, 50, SeedSpec(SEED, 300 + k))
        for m, fn in est.ESTIMATORS.items():
            try:
                a = fn(s, TOL).theta_hat
            except est.EstimationError:
                skipped += 1
                continue
            worst[m] = max(worst[m], abs(fn(s.flip(), TOL).theta_hat + a))
    ok = all(w <= 2 * TOL for w in worst.values())
    criterion(9, ok, "max |E(flip s) + E(s)|: " + ", ".join(f"{m.value} {w:.1e}" for m, w in worst.items())
              + f" (<= {2 * TOL:.0e}); {skipped} estimation failures")
    pos = run_cell(SimulationCell(50, 3.0, 1000, SeedSpec(SEED)))
    neg = run_cell(SimulationCell(50, -3.0, 1000, SeedSpec(SEED)))
    gap = max(abs(pos[m].bias + neg[m].bias) for m in Method)
    mse_gap = max(abs(pos[m].mse - neg[m].mse) for m in Method)
    ok2 = gap <= 1e-12 and mse_gap <= 1e-12
    criterion(9, ok2, f"bias oddness under flipped pairing: max |b(3) + b(-3)| = {gap:.1e}, MSE gap {mse_gap:.1e}")
    assert ok and ok2


def test_criterion_10_mle_residuals_on_grid(criterion):
    worst, accepted, failures = 0.0, 0, 0
    for c in standard_grid(1000, SeedSpec(SEED)):
        e = cell_estimates(c)
        u1, u2 = sample_arrays(abs(c.theta), c.n, c.seed.base_seed, range(c.replications))
        if c.theta < 0:
            u2 = 1.0 - u2
        ok_rows = np.flatnonzero(~e.failed[Method.ML])
        failures += c.replications - ok_rows.size
        for i in ok_rows:
            s = BivariateSample(u1[i], u2[i])
            t = float(e.theta_hat[Method.ML][i])
            h = est.h_at_zero_limit(s) if t == 0 else est.h_of_theta(s, t)
            worst = max(worst, abs(h))
        accepted += ok_rows.size
    ok = worst <= 1e-8
    criterion(10, ok, f"max |H(theta_ML)| = {worst:.2e} over {accepted} accepted estimates ({failures} failures)")
    assert ok


def test_criterion_11_h_limits_reference_data(criterion):
    s = reference_sample()
    a = s.u1 + s.u2
    pos_target = -np.mean(np.abs(s.u1 - s.u2))
    neg_target = np.mean(1 - a + 2 * np.maximum(a, 1))
    hp, hn = est.h_of_theta(s, 600.0), est.h_of_theta(s, -600.0)
    ok1 = abs(hp - pos_target) <= 1e-6
    ok2 = abs(hn - neg_target) <= 1e-6
    criterion(11, ok1, f"H(600) = {hp:.9f} vs {pos_target:.9f}, gap {abs(hp - pos_target):.2e}")
    criterion(11, ok2, f"H(-600) = {hn:.9f} vs {neg_target:.9f}, gap {abs(hn - neg_target):.2e}")
    assert ok1 and ok2
