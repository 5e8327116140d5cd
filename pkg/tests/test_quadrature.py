import numpy as np
import pytest

from anisofit.geometry import Interval1D, RectElement, TriElement
from anisofit.quadrature import integrate, integrate_domain, rule_for, triangle_reference_rule

TRI = TriElement(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))


def monomial_on_unit_triangle(i, j):
    # int x^i y^j over the unit right triangle = i! j! / (i + j + 2)!
    from math import factorial

    return factorial(i) * factorial(j) / factorial(i + j + 2)


@pytest.mark.parametrize("degree,depth", [(5, 0), (5, 2), (8, 0), (10, 1)])
def test_triangle_rule_exactness(degree, depth):
    _, _, exact = triangle_reference_rule(degree, depth)
    for i in range(exact + 1):
        for j in range(exact + 1 - i):
            got = integrate(lambda x, y: x**i * y**j, TRI, degree, depth)
            assert got == pytest.approx(monomial_on_unit_triangle(i, j), rel=1e-12, abs=1e-15)


def test_weights_sum_to_measure():
    assert rule_for(TRI).weights.sum() == pytest.approx(0.5)
    r = RectElement.from_bounds(-1, 3, 0, 0.5)
    assert rule_for(r, 5, 2).weights.sum() == pytest.approx(2.0)
    assert rule_for(Interval1D(2.0, 5.0)).weights.sum() == pytest.approx(3.0)


def test_rect_and_interval_exactness():
    r = RectElement.from_bounds(0, 2, 1, 2)
    assert integrate(lambda x, y: x**3 * y**4, r, 8) == pytest.approx(4.0 * (2**5 - 1) / 5)
    assert integrate(lambda x: x**7, Interval1D(0.0, 1.0), 8) == pytest.approx(1 / 8)


def test_integrate_domain():
    sq = RectElement.from_bounds(-2, 2, -2, 2)
    assert integrate_domain(lambda x, y: x**2 + y**2, sq, cells=10) == pytest.approx(2 * 4 * 16 / 3)
    assert integrate_domain(lambda x, y: np.ones_like(x), TRI, cells=4) == pytest.approx(0.5)
