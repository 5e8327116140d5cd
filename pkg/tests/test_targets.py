import math

import numpy as np
import pytest

from anisofit import targets as T


def test_builtin_values():
    assert T.builtin("power_alpha", [0.5]).eval(0.25) == pytest.approx(0.5)
    assert T.builtin("quadratic_form", [1, 0, 100]).eval(1.0, 1.0) == pytest.approx(101.0)


def test_builtin_errors():
    with pytest.raises(ValueError, match="unknown target"):
        T.builtin("nope")
    with pytest.raises(ValueError, match="parameter"):
        T.builtin("sharp_ring", [])


def test_spec_string_round_trip():
    f = T.builtin("sharp_ring", [0.1])
    name, _, params = f.spec.partition(":")
    assert T.builtin(name, [float(p) for p in params.split(",")]).params == f.params


@pytest.mark.parametrize("delta", [0.05, 0.1, 0.2])
def test_sharp_ring_profile(delta):
    assert T.ring_profile(delta, np.array([1.0]))[0] == pytest.approx(1.0)
    assert T.ring_profile(delta, np.array([1.0 + delta]))[0] == pytest.approx(-1.0)
    # matches the closed-form branches away from the blend
    assert T.ring_profile(delta, np.array([0.5]))[0] == pytest.approx((5 - 0.25) / 4)
    r = 1.5 + delta
    assert T.ring_profile(delta, np.array([r]))[0] == pytest.approx(-(5 - (1 + delta - r) ** 2) / 4)


@pytest.mark.parametrize("delta", [0.05, 0.2])
def test_sharp_ring_blend_is_c2(delta):
    # left branch (5 - r^2)/4: g' = -1/2, g'' = -1/2 at r = 1
    assert T.eval_sharp_ring_blend(delta, 1.0, 1) == pytest.approx(-0.5, abs=1e-10)
    assert T.eval_sharp_ring_blend(delta, 1.0, 2) == pytest.approx(-0.5, abs=1e-10)
    # right branch -(5 - (1 + delta - r)^2)/4: g' = -1/2, g'' = +1/2 at r = 1 + delta
    assert T.eval_sharp_ring_blend(delta, 1.0 + delta, 1) == pytest.approx(-0.5, abs=1e-10)
    assert T.eval_sharp_ring_blend(delta, 1.0 + delta, 2) == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(ValueError):
        T.eval_sharp_ring_blend(delta, 0.5)


def test_sharp_ring_gradient_matches_finite_differences():
    f = T.sharp_ring(0.1)
    x, y, h = 0.7, 0.72, 1e-6
    fx, fy = f.grad(np.array(x), np.array(y))
    assert fx == pytest.approx((f.eval(x + h, y) - f.eval(x - h, y)) / (2 * h), rel=1e-5)
    assert fy == pytest.approx((f.eval(x, y + h) - f.eval(x, y - h)) / (2 * h), rel=1e-5)
    fxx, fxy, fyy = f.hess(np.array(x), np.array(y))
    gx = lambda xx, yy: f.grad(np.array(xx), np.array(yy))[0]
    assert fxx == pytest.approx((gx(x + h, y) - gx(x - h, y)) / (2 * h), rel=1e-4)
    assert fxy == pytest.approx((gx(x, y + h) - gx(x, y - h)) / (2 * h), rel=1e-4)


def test_bump():
    assert T.bump_phi(0.5) == pytest.approx(math.exp(-4))
    assert T.bump_phi(0.0) == 0.0 and T.bump_phi(1.0) == 0.0
    t = np.linspace(0, 1, 17)
    assert np.allclose(T.bump_phi(t), T.bump_phi(1 - t))


def test_raster_target():
    one = T.raster_target(T.RasterImage(1, 1, [0.3]))
    assert np.allclose(one.eval(np.array([0.1, 0.9]), np.array([0.5, 0.2])), 0.3)
    img = T.RasterImage(2, 2, [0.0, 0.25, 0.5, 1.0])  # row 0 is the top row
    f = T.raster_target(img)
    px, py = img.pixel_centers()
    assert np.allclose(f.eval(px, py), img.samples)
    assert f.eval(0.25, 0.75) == 0.0 and f.eval(0.75, 0.25) == 1.0
    with pytest.raises(ValueError):
        T.RasterImage(2, 2, [0.0])


def test_counterexample_is_bump_difference():
    f = T.oscillatory_counterexample()
    assert f.eval(0.125, 0.3) == pytest.approx(T.bump_phi(0.5))
    assert f.eval(0.375, 0.3) == pytest.approx(-T.bump_phi(0.5))
    assert f.eval(0.8, 0.3) == 0.0
