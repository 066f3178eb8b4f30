import math

import numpy as np
import pytest

from nctriple import quadrature as quad


def test_gauss_legendre_polynomial_and_smooth():
    r = quad.gauss_legendre(lambda x: x ** 5 - 3 * x ** 2, -1.0, 2.0)
    assert r.value == pytest.approx(2.0 ** 6 / 6 - 1 / 6 - 9.0, rel=1e-13)
    r = quad.gauss_legendre(np.cos, 0.0, 40.0)
    assert r.value == pytest.approx(math.sin(40.0), abs=1e-12)
    assert r.converged


def test_gauss_legendre_reversed_and_empty():
    assert quad.gauss_legendre(np.exp, 1.0, 0.0).value == pytest.approx(1 - math.e)
    assert quad.gauss_legendre(np.exp, 1.0, 1.0).value == 0.0


def test_semi_infinite_rational():
    r = quad.semi_infinite(lambda x: 1.0 / (1.0 + x * x), 0.0)
    assert r.value == pytest.approx(math.pi / 2, rel=1e-12)
    r = quad.semi_infinite(lambda x: np.exp(-x), 2.0, scale=3.0)
    assert r.value == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_log1p_square_large_arguments():
    y = np.array([0.0, 1e-8, 3.0, 1e200])
    np.testing.assert_allclose(quad.log1p_square(y)[:3], np.log1p(y[:3] ** 2), rtol=1e-15)
    assert quad.log1p_square(y)[3] == pytest.approx(400 * math.log(10), rel=1e-15)


def test_log_line_integral_gaussian_and_divergent():
    r = quad.log_line_integral(lambda x: -0.5 * x * x)
    assert r.classification == quad.CONVERGENT
    assert r.value == pytest.approx(math.sqrt(2 * math.pi), rel=1e-11)
    assert r.tail < 1e-6
    # 1/(1+e^x) tends to 1 as x → −∞
    d = quad.log_line_integral(lambda x: -np.logaddexp(0.0, x))
    assert d.classification == quad.DIVERGENT
    assert d.slopes == pytest.approx((0.0, -1.0))


def test_log_line_integral_huge_scale():
    # e^{700}·sech(x): evaluated in log space without overflow
    r = quad.log_line_integral(lambda x: 700.0 - np.logaddexp(x, -x) + math.log(2.0))
    assert r.value == pytest.approx(math.pi * math.exp(700.0), rel=1e-10)


def test_tail_slopes_exact_for_exponentials():
    left, right = quad.tail_slopes(lambda x: 2.0 * x - 5.0 * np.logaddexp(0.0, x))
    assert left == pytest.approx(2.0)
    assert right == pytest.approx(-3.0)


def test_log_series_geometric_and_divergent():
    s = quad.log_series(lambda n: -np.abs(n) * math.log(2.0))
    assert s.classification == quad.CONVERGENT
    assert s.value == pytest.approx(3.0, rel=1e-12)
    d = quad.log_series(lambda n: np.zeros_like(n))
    assert d.classification == quad.DIVERGENT
