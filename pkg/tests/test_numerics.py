import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frankfit.errors import QuadratureNotConverged
from frankfit.quadrature import QuadratureSpec, Rule, gauss_legendre_unit, integrate_interval, integrate_unit_square
from frankfit.rootfind import chandrupatla, expand_upward


def test_gauss_legendre_exactness():
    x, w = gauss_legendre_unit(10)
    for p in range(20):
        assert float(w @ x**p) == pytest.approx(1 / (p + 1), rel=1e-13)


def test_interval_and_square():
    spec = QuadratureSpec(Rule.GAUSS_LEGENDRE, 40, 1e-12)
    assert integrate_interval(np.exp, 0.0, 1.0, spec) == pytest.approx(math.e - 1, rel=1e-14)
    val, err = integrate_unit_square(lambda a, b: np.sin(a) * np.exp(b), spec)
    assert val == pytest.approx((1 - math.cos(1)) * (math.e - 1), rel=1e-14)
    ad = QuadratureSpec(Rule.ADAPTIVE, 21 * 50, 1e-10)
    assert integrate_interval(np.exp, 0.0, 1.0, ad) == pytest.approx(math.e - 1, rel=1e-12)


def test_quadrature_spec_validation_and_failure():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_error_target=0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_nodes=4)
    spec = QuadratureSpec(Rule.GAUSS_LEGENDRE, 16, 1e-14)
    with pytest.raises(QuadratureNotConverged) as info:
        integrate_interval(lambda x: np.sqrt(x), 0.0, 1.0, spec)
    assert info.value.error > 1e-14


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=20))
def test_chandrupatla_cubic_roots(roots):
    r = np.array(roots)
    f = lambda x, idx: (x - r[idx]) ** 3 + (x - r[idx])
    a, b = r - 3.0, r + 7.0
    sol = chandrupatla(f, a, b, f(a, np.arange(r.size)), f(b, np.arange(r.size)), xtol=1e-13)
    assert np.all(sol.converged)
    np.testing.assert_allclose(sol.x, r, atol=1e-10)
    assert np.all(sol.iterations <= 200)


def test_chandrupatla_requires_sign_change():
    f = lambda x, idx: x * x + 1
    with pytest.raises(ValueError):
        chandrupatla(f, np.array([0.0]), np.array([1.0]), np.array([1.0]), np.array([2.0]))


def test_expand_upward():
    c = np.array([0.3, 5.0, 1000.0])
    f = lambda x, idx: c[idx] - x
    lo, flo, hi, fhi, found = expand_upward(f, np.zeros(3), c, 1e-3, 700.0)
    assert list(found) == [True, True, False]
    assert np.all((lo[:2] < c[:2]) & (c[:2] <= hi[:2]))
    assert hi[2] == 700.0
