import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisofit import localerr as L
from anisofit import targets as T
from anisofit.geometry import HALVE_Y, Interval1D, RectElement, TriElement, split_rect

UNIT = RectElement.from_bounds(0, 1, 0, 1)
RIGHT = TriElement(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))


def poly_target(coefs, m):
    """Random polynomial of total degree m - 1 in (x, y)."""
    exps = L.exponents(m, 2)

    def ev(x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return sum(c * x**i * y**j for c, (i, j) in zip(coefs, exps))

    return T.TargetFunction("poly", UNIT, ev)


def dense_l2_error(f, tri, m, n=400_000, seed=1):
    """Monte Carlo least squares on the triangle: an independent estimate."""
    rng = np.random.default_rng(seed)
    u, v = rng.random(n), rng.random(n)
    flip = u + v > 1
    u[flip], v[flip] = 1 - u[flip], 1 - v[flip]
    p = tri.points
    x = p[0, 0] + u * (p[1, 0] - p[0, 0]) + v * (p[2, 0] - p[0, 0])
    y = p[0, 1] + u * (p[1, 1] - p[0, 1]) + v * (p[2, 1] - p[0, 1])
    V = np.stack([x**i * y**j for i, j in L.exponents(m, 2)], axis=1)
    vals = f.eval(x, y)
    c, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return math.sqrt(np.mean((vals - V @ c) ** 2) * tri.area)


def test_projection_closed_forms():
    x2 = T.TargetFunction("x2", T.UNIT_INTERVAL, lambda x: np.asarray(x, float) ** 2)
    fit = L.l2_project(x2, Interval1D(0.0, 1.0), 1)
    assert fit.mean_value == pytest.approx(1 / 3)
    assert fit.error_value == pytest.approx(math.sqrt(4 / 45), rel=1e-12)
    xy = T.affine2(0, 1, 1)
    fit = L.l2_project(xy, UNIT, 1)
    assert fit.mean_value == pytest.approx(1.0)
    assert fit.error_value == pytest.approx(1 / math.sqrt(6), rel=1e-12)


def test_linf_closed_forms():
    ident = T.TargetFunction("x", T.UNIT_INTERVAL, lambda x: np.asarray(x, float))
    fit = L.linf_best_constant(ident, Interval1D(0.0, 1.0))
    assert (fit.mean_value, fit.error_value) == (pytest.approx(0.5), pytest.approx(0.5))
    assert L.linf_best_constant(T.affine2(0, 1, 1), UNIT).error_value == pytest.approx(1.0)
    const = T.affine2(3.0, 0.0, 0.0)
    assert L.linf_best_constant(const, UNIT).error_value == 0.0


def test_lp_error_one_dimensional():
    x2 = T.TargetFunction("x2", T.UNIT_INTERVAL, lambda x: np.asarray(x, float) ** 2)
    assert L.lp_error(x2, Interval1D(0.0, 1.0), 1, math.inf) == pytest.approx(0.5)
    assert L.lp_error(T.sin_1d(), Interval1D(0.0, 1.0), 1, math.inf) == pytest.approx(0.5)


def test_interpolation_error():
    f = T.quadratic_form(1, 0, 1)
    fit = L.interpolate_linear(f, RIGHT, 33)
    assert fit.error_value == pytest.approx(0.5)
    assert L.interpolate_linear(T.affine2(1, 2, 3), RIGHT).error_value < 1e-12
    small = TriElement(((0.0, 0.0), (0.25, 0.0), (0.0, 0.25)))
    assert L.interpolate_linear(f, small, 33).error_value == pytest.approx(0.5 / 16)


@pytest.mark.parametrize("m", [1, 2, 3])
@given(coefs=st.lists(st.floats(-5, 5), min_size=6, max_size=6),
       p=st.sampled_from([1.0, 2.0, 3.5, math.inf]))
def test_polynomial_reproduction(m, coefs, p):
    f = poly_target(coefs, m)
    for el in (UNIT, RIGHT, RectElement.from_bounds(0.1, 0.11, 0.2, 0.9),
               TriElement(((0.2, 0.2), (0.9, 0.25), (0.2, 0.21)))):
        assert L.lp_error(f, el, m, p) < 1e-10


def test_projection_matches_monte_carlo_oracle():
    f = T.product_sine()
    tri = TriElement(((0.1, 0.1), (0.9, 0.3), (0.3, 0.8)))
    for m in (1, 2, 3):
        got = L.l2_project(f, tri, m).error_value
        assert got == pytest.approx(dense_l2_error(f, tri, m), rel=2e-2)


@given(h=st.floats(0.01, 10.0), dx=st.floats(-5, 5), dy=st.floats(-5, 5))
def test_scaling_and_translation_invariance(h, dx, dy):
    # for homogeneous quadratics: e(f, x0 + hT) = h^(2 + 2/p) e(f, T) in L^p (p finite), h^2 for p = inf
    f = T.quadratic_form(1.0, 0.3, 2.0)
    base = TriElement(((0.0, 0.0), (1.0, 0.2), (0.3, 0.7)))
    moved = TriElement(tuple((dx + h * x, dy + h * y) for x, y in base.vertices))
    for p, power in ((2.0, 2 + 2 / 2.0), (math.inf, 2.0)):
        a = L.lp_error(f, base, 2, p)
        b = L.lp_error(f, moved, 2, p)
        assert b == pytest.approx(h**power * a, rel=1e-7)


def test_discrete_projection():
    img = T.RasterImage(2, 2, [1.0, 1.0, 0.0, 0.0])  # top row 1, bottom row 0
    down, up = split_rect(UNIT, HALVE_Y)
    assert L.discrete_l2_project(img, down, 1).error_value == 0.0
    assert L.discrete_l2_project(img, up, 1).mean_value == 1.0
    whole = L.discrete_l2_project(img, UNIT, 1)
    assert whole.error_value == pytest.approx(1.0)  # unnormalized: sqrt(4 * 0.25)
    single = L.discrete_l2_project(img, RectElement.from_bounds(0, 0.5, 0.5, 1), 2)
    assert single.error_value == 0.0 and single.mean_value == 1.0
    const = T.RasterImage(8, 8, np.full(64, 0.4))
    assert L.discrete_l2_project(const, RIGHT, 3).error_value < 1e-12


def test_discrete_sums_match_global():
    rng = np.random.default_rng(3)
    img = T.RasterImage(16, 16, rng.random(256))
    kids = split_rect(UNIT, HALVE_Y)
    tot = L.discrete_l2_project(img, UNIT, 1).error_value
    means = [L.discrete_l2_project(img, k, 1) for k in kids]
    # the sum of squared child errors never exceeds the parent's
    assert sum(m.error_value**2 for m in means) <= tot**2 + 1e-12


def test_thin_element_does_not_break_fit():
    f = T.product_sine()
    needle = TriElement(((0.0, 0.0), (1.0, 0.0), (0.5, 1e-7)))
    fit = L.l2_project(f, needle, 3)
    assert np.isfinite(fit.error_value)


def test_combine():
    assert L.combine([3.0, 4.0], 2.0) == pytest.approx(5.0)
    assert L.combine([3.0, 4.0], math.inf) == 4.0
    assert L.combine([], 2.0) == 0.0
