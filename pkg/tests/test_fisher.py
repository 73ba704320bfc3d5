import math

import numpy as np
import pytest

from frankfit.copula import frank_log_pdf
from frankfit.fisher import (
    FISHER_AT_INDEPENDENCE,
    FisherMethod,
    asymptotic_variance,
    fisher_information,
    i1_term,
    i2_monte_carlo,
    i2_quadrature,
    j_ratio,
    score_variance,
    write_fisher_csv,
)
from frankfit.quadrature import QuadratureSpec
from frankfit.sampler import SeedSpec

# -(d/dtheta)^2 log(bracket) by 50-digit mpmath differentiation
J_03_06_2 = 0.21521772447071806455
J_02_07_4 = 0.021383495054071908835
# E[score^2] by scipy dblquad of an mpmath score
INFO_REF = {1: 0.02731725418335905, 5: 0.01872223123626325}


def test_i1_closed_form():
    assert i1_term(1.0) == pytest.approx(1 + math.e / (math.e - 1) ** 2, rel=1e-15)
    assert i1_term(-3.0) == i1_term(3.0)
    assert i1_term(50.0) == pytest.approx(1 / 2500 + math.exp(-50), rel=1e-15)
    assert math.isfinite(i1_term(700.0))
    with pytest.raises(ValueError):
        i1_term(0.0)


def test_j_ratio_oracles():
    assert j_ratio(0.3, 0.6, 2.0) == pytest.approx(J_03_06_2, rel=1e-12)
    assert j_ratio(0.2, 0.7, 4.0) == pytest.approx(J_02_07_4, rel=1e-12)
    assert j_ratio(0.2, 0.7, 4.0) == pytest.approx(j_ratio(0.7, 0.2, 4.0), rel=1e-13)
    assert j_ratio(0.2, 0.3, -4.0) == pytest.approx(j_ratio(0.2, 0.7, 4.0), rel=1e-12)


def test_j_ratio_matches_hessian():
    # -d2/dtheta2 log c = I1-type terms + 2 J; the constant part is 1/theta^2 + e^t/(e^t-1)^2
    t, h = 2.0, 1e-4
    d2 = (frank_log_pdf(0.3, 0.6, t + h) - 2 * frank_log_pdf(0.3, 0.6, t) + frank_log_pdf(0.3, 0.6, t - h)) / h**2
    assert -d2 == pytest.approx(i1_term(t) - 2 * j_ratio(0.3, 0.6, t), abs=1e-4)


@pytest.mark.parametrize("theta", [1, 5])
def test_information_reference(theta):
    assert fisher_information(theta).i_total == pytest.approx(INFO_REF[theta], rel=1e-9)


def test_quadrature_refinement_and_evenness():
    fine = i2_quadrature(10.0, QuadratureSpec("gauss-legendre", 256, 1e-8))
    assert i2_quadrature(10.0) == pytest.approx(fine, abs=1e-8)
    assert i2_quadrature(-2.0) == pytest.approx(i2_quadrature(2.0), abs=1e-8)
    a, b = fisher_information(2.0), fisher_information(-2.0)
    assert abs(a.i_total - b.i_total) / a.i_total < 1e-6


def test_information_shape():
    grid = np.arange(0.1, 10.01, 0.3)
    vals = np.array([fisher_information(t).i_total for t in grid])
    assert np.all(vals > 0)
    # information falls as |theta| grows, so 1/I rises and stays bounded on [0.1, 10]
    assert np.all(np.diff(vals) < 0)
    assert np.all(np.isfinite(1 / vals))
    for t in (0.1, 1, 10):
        assert asymptotic_variance(t) > 0


def test_small_theta_path():
    r = fisher_information(1e-5)
    assert r.i_total == pytest.approx(FISHER_AT_INDEPENDENCE, rel=1e-4)
    assert fisher_information(0.0).i_total == pytest.approx(FISHER_AT_INDEPENDENCE, rel=1e-4)
    var, se = score_variance(0.0, 200_000, SeedSpec(2))
    assert abs(var - FISHER_AT_INDEPENDENCE) < 4 * se


def test_monte_carlo_determinism_and_scaling():
    a = i2_monte_carlo(2.0, 20_000, SeedSpec(5))
    b = i2_monte_carlo(2.0, 20_000, SeedSpec(5))
    assert a == b
    c = i2_monte_carlo(2.0, 40_000, SeedSpec(6))
    assert a.mc_standard_error / c.mc_standard_error == pytest.approx(math.sqrt(2), rel=0.2)
    assert a.method is FisherMethod.MONTE_CARLO
    with pytest.raises(ValueError):
        i2_monte_carlo(2.0, 10, SeedSpec(1))


def test_csv(tmp_path):
    path = tmp_path / "f.csv"
    write_fisher_csv([fisher_information(3.0), fisher_information(-3.0)], path, ["x = 1"])
    lines = path.read_text().splitlines()
    assert lines[1] == "theta,i1,i2,i_total,inv_i,method,mc_se"
    assert lines[2].split(",")[3] == lines[3].split(",")[3]
