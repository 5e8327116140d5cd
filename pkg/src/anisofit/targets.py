"""Target functions: analytic built-ins with derivatives, and pixel rasters."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import Element, Interval1D, RectElement


@dataclass(frozen=True)
class TargetFunction:
    """A scalar field on ``domain``.

    ``eval``, ``grad`` and ``hess`` are vectorized: 1D targets take ``x``,
    2D targets take ``(x, y)``.  ``grad`` returns ``(f_x, f_y)`` and ``hess``
    returns ``(f_xx, f_xy, f_yy)``.
    """

    name: str
    domain: Element
    eval: Callable
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    sharpness_hint: float = 0.0  # length scale of sharp features, 0 if smooth
    image: Optional["RasterImage"] = None
    params: tuple = ()

    @property
    def dim(self) -> int:
        return 1 if isinstance(self.domain, Interval1D) else 2

    def __call__(self, *xy):
        return self.eval(*xy)

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(repr(float(p)) for p in self.params)


@dataclass(frozen=True)
class RasterImage:
    """Row-major grayscale samples in [0, 1]; row 0 is the top of the unit square."""

    width: int
    height: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size != self.width * self.height:
            raise ValueError(f"{self.width}x{self.height} image needs {self.width * self.height} samples, got {s.size}")
        object.__setattr__(self, "samples", s)

    @property
    def array(self) -> np.ndarray:
        return self.samples.reshape(self.height, self.width)

    def pixel_centers(self):
        cols = (np.arange(self.width) + 0.5) / self.width
        rows = 1.0 - (np.arange(self.height) + 0.5) / self.height
        X, Y = np.meshgrid(cols, rows)
        return X.ravel(), Y.ravel()

    def nearest(self, x, y) -> np.ndarray:
        j = np.clip(np.floor(np.asarray(x) * self.width), 0, self.width - 1).astype(int)
        i = np.clip(np.floor((1.0 - np.asarray(y)) * self.height), 0, self.height - 1).astype(int)
        return self.samples[i * self.width + j]


UNIT_SQUARE = RectElement.from_bounds(0.0, 1.0, 0.0, 1.0)
UNIT_INTERVAL = Interval1D(0.0, 1.0, (0, 0))


def bump_phi(t):
    """exp(-1/(t(1-t))) on (0, 1), zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    out[m] = np.exp(-1.0 / (tm * (1.0 - tm)))
    return out if out.ndim else float(out)


def _bump_d1(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    s = tm * (1.0 - tm)
    out[m] = np.exp(-1.0 / s) * (1.0 - 2.0 * tm) / s**2
    return out


def _bump_d2(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    s = tm * (1.0 - tm)
    ds = 1.0 - 2.0 * tm
    # phi = exp(-1/s); phi' = phi * ds / s^2
    # phi'' = phi * [ (ds/s^2)^2 + (-2 s^2 - 2 s ds^2) / s^4 ]
    out[m] = np.exp(-1.0 / s) * ((ds / s**2) ** 2 + (-2.0 * s - 2.0 * ds**2) / s**3)
    return out


# --- the C^2 ring profile ---------------------------------------------------


def _blend_coefficients(delta: float) -> np.ndarray:
    """Quintic on [1, 1+delta] in the local variable s = r - 1."""
    # Hermite data (value, d/dr, d2/dr2) at both joints
    left = (1.0, -0.5, -0.5)
    right = (-1.0, -0.5, 0.5)
    d = delta
    A = np.array(
        [
            [1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 2, 0, 0, 0],
            [1, d, d**2, d**3, d**4, d**5],
            [0, 1, 2 * d, 3 * d**2, 4 * d**3, 5 * d**4],
            [0, 0, 2, 6 * d, 12 * d**2, 20 * d**3],
        ],
        dtype=float,
    )
    return np.linalg.solve(A, np.array(left + right))


def eval_sharp_ring_blend(delta: float, r, derivative: int = 0):
    """The quintic joining the two quadratic branches of the ring profile."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 1.0 - 1e-12) or np.any(r_arr > 1.0 + delta + 1e-12):
        raise ValueError(f"r outside the blend interval [1, {1 + delta}]")
    c = _blend_coefficients(delta)
    poly = np.polynomial.Polynomial(c)
    for _ in range(derivative):
        poly = poly.deriv()
    out = poly(r_arr - 1.0)
    return out if np.ndim(out) else float(out)


def ring_profile(delta: float, r, derivative: int = 0) -> np.ndarray:
    """g_delta(r) and its first two derivatives."""
    r = np.asarray(r, dtype=float)
    c = np.polynomial.Polynomial(_blend_coefficients(delta))
    for _ in range(derivative):
        c = c.deriv()
    inner = r <= 1.0
    outer = r >= 1.0 + delta
    s = r - 1.0 - delta
    if derivative == 0:
        vin = (5.0 - r**2) / 4.0
        vout = -(5.0 - (1.0 - s) ** 2) / 4.0
    elif derivative == 1:
        vin = -r / 2.0
        vout = -(1.0 - s) / 2.0
    else:
        vin = np.full_like(r, -0.5)
        vout = np.full_like(r, 0.5)
    return np.where(inner, vin, np.where(outer, vout, c(r - 1.0)))


def _radial_target(name, g, domain, sharp, params) -> TargetFunction:
    def ev(x, y):
        return g(np.hypot(x, y), 0)

    def grad(x, y):
        r = np.hypot(x, y)
        rs = np.where(r > 0, r, 1.0)
        d1 = g(r, 1) / rs
        return d1 * x, d1 * y

    def hess(x, y):
        r = np.hypot(x, y)
        rs = np.where(r > 0, r, 1.0)
        d1 = g(r, 1)
        d2 = g(r, 2)
        # tangential curvature g'(r)/r -> g''(0) at the origin
        tang = np.where(r > 0, d1 / rs, d2)
        ux = np.where(r > 0, x / rs, 1.0)
        uy = np.where(r > 0, y / rs, 0.0)
        fxx = d2 * ux * ux + tang * (1 - ux * ux)
        fxy = (d2 - tang) * ux * uy
        fyy = d2 * uy * uy + tang * (1 - uy * uy)
        return fxx, fxy, fyy

    return TargetFunction(name, domain, ev, grad, hess, sharp, None, params)


def sharp_ring(delta: float, domain: Optional[Element] = None) -> TargetFunction:
    if delta <= 0:
        raise ValueError("sharp_ring needs delta > 0")
    dom = domain if domain is not None else RectElement.from_bounds(-2.0, 2.0, -2.0, 2.0)
    return _radial_target("sharp_ring", lambda r, k: ring_profile(delta, r, k), dom, float(delta), (delta,))


def raster_target(img: RasterImage) -> TargetFunction:
    if img.width * img.height == 0:
        raise ValueError("empty image")
    return TargetFunction("raster", UNIT_SQUARE, img.nearest, None, None, 0.0, img, ())


# --- polynomial builtins ------------------------------------------------------


def affine2(q0=0.0, qx=1.0, qy=1.0, domain=UNIT_SQUARE) -> TargetFunction:
    return TargetFunction(
        "affine2",
        domain,
        lambda x, y: q0 + qx * np.asarray(x) + qy * np.asarray(y),
        lambda x, y: (np.full_like(np.asarray(x, float), qx), np.full_like(np.asarray(x, float), qy)),
        lambda x, y: (np.zeros_like(np.asarray(x, float)),) * 3,
        params=(q0, qx, qy),
    )


def quadratic_form(a=1.0, b=0.0, c=1.0, domain=UNIT_SQUARE) -> TargetFunction:
    """a x^2 + 2 b x y + c y^2."""

    def const(v):
        return lambda x, y: np.full_like(np.asarray(x, float), v)

    return TargetFunction(
        "quadratic_form",
        domain,
        lambda x, y: a * np.asarray(x) ** 2 + 2 * b * np.asarray(x) * y + c * np.asarray(y) ** 2,
        lambda x, y: (2 * a * np.asarray(x) + 2 * b * np.asarray(y), 2 * b * np.asarray(x) + 2 * c * np.asarray(y)),
        lambda x, y: (const(2 * a)(x, y), const(2 * b)(x, y), const(2 * c)(x, y)),
        params=(a, b, c),
    )


def cubic_form(a=1.0, b=0.0, c=0.0, d=0.0, domain=UNIT_SQUARE) -> TargetFunction:
    """a x^3 + b x^2 y + c x y^2 + d y^3."""

    def ev(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return a * x**3 + b * x**2 * y + c * x * y**2 + d * y**3

    def grad(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return 3 * a * x**2 + 2 * b * x * y + c * y**2, b * x**2 + 2 * c * x * y + 3 * d * y**2

    def hess(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return 6 * a * x + 2 * b * y, 2 * b * x + 2 * c * y, 2 * c * x + 6 * d * y

    return TargetFunction("cubic_form", domain, ev, grad, hess, params=(a, b, c, d))


def power_alpha(alpha: float) -> TargetFunction:
    if not 0 < alpha:
        raise ValueError("alpha must be positive")

    def ev(x):
        return np.power(np.clip(np.asarray(x, float), 0.0, None), alpha)

    def grad(x):
        x = np.asarray(x, float)
        return alpha * np.power(np.where(x > 0, x, np.inf), alpha - 1.0)

    return TargetFunction("power_alpha", UNIT_INTERVAL, ev, grad, params=(alpha,))


def sin_1d(freq: float = np.pi) -> TargetFunction:
    return TargetFunction(
        "sin_1d",
        UNIT_INTERVAL,
        lambda x: np.sin(freq * np.asarray(x, float)),
        lambda x: freq * np.cos(freq * np.asarray(x, float)),
        lambda x: -(freq**2) * np.sin(freq * np.asarray(x, float)),
        params=(freq,),
    )


def oscillatory_counterexample() -> TargetFunction:
    """phi(4x) - phi(4x - 1): zero mean on the square and on all four halves."""

    def ev(x, y):
        x = np.asarray(x, float)
        return (bump_phi(4 * x) - bump_phi(4 * x - 1)) + 0.0 * np.asarray(y, float)

    def grad(x, y):
        x = np.asarray(x, float)
        return 4 * (_bump_d1(4 * x) - _bump_d1(4 * x - 1)), np.zeros_like(x + np.asarray(y, float))

    def hess(x, y):
        x = np.asarray(x, float)
        z = np.zeros_like(x + np.asarray(y, float))
        return 16 * (_bump_d2(4 * x) - _bump_d2(4 * x - 1)), z, z

    return TargetFunction("oscillatory_counterexample", UNIT_SQUARE, ev, grad, hess)


def cartoon_disk(cx=0.5, cy=0.5, radius=0.3, contrast=1.0) -> TargetFunction:
    """Indicator of a disk scaled by ``contrast``; no derivatives."""

    def ev(x, y):
        return contrast * ((np.asarray(x, float) - cx) ** 2 + (np.asarray(y, float) - cy) ** 2 <= radius**2)

    return TargetFunction("cartoon_disk", UNIT_SQUARE, ev, None, None, 1.0 / 64, None, (cx, cy, radius, contrast))


def product_sine(a=np.pi, b=np.pi) -> TargetFunction:
    """sin(a x) sin(b y)."""

    def ev(x, y):
        return np.sin(a * np.asarray(x, float)) * np.sin(b * np.asarray(y, float))

    def grad(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return a * np.cos(a * x) * np.sin(b * y), b * np.sin(a * x) * np.cos(b * y)

    def hess(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        s = np.sin(a * x) * np.sin(b * y)
        return -(a**2) * s, a * b * np.cos(a * x) * np.cos(b * y), -(b**2) * s

    return TargetFunction("product_sine", UNIT_SQUARE, ev, grad, hess, params=(a, b))


def ridge_sine(a=2.0, b=3.0) -> TargetFunction:
    """sin(a x + b y)."""

    def ev(x, y):
        return np.sin(a * np.asarray(x, float) + b * np.asarray(y, float))

    def grad(x, y):
        c = np.cos(a * np.asarray(x, float) + b * np.asarray(y, float))
        return a * c, b * c

    def hess(x, y):
        s = -np.sin(a * np.asarray(x, float) + b * np.asarray(y, float))
        return a * a * s, a * b * s, b * b * s

    return TargetFunction("ridge_sine", UNIT_SQUARE, ev, grad, hess, params=(a, b))


_BUILTINS = {
    "power_alpha": (power_alpha, 1),
    "sin_1d": (sin_1d, None),
    "affine2": (affine2, None),
    "quadratic_form": (quadratic_form, None),
    "cubic_form": (cubic_form, None),
    "sharp_ring": (sharp_ring, 1),
    "oscillatory_counterexample": (oscillatory_counterexample, 0),
    "cartoon_disk": (cartoon_disk, None),
    "product_sine": (product_sine, None),
    "ridge_sine": (ridge_sine, None),
}


def builtin(name: str, params: Sequence[float] = ()) -> TargetFunction:
    try:
        factory, arity = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown target {name!r}; known: {', '.join(sorted(_BUILTINS))}") from None
    params = tuple(float(p) for p in params)
    if arity is not None and len(params) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(params)}")
    return factory(*params)


def builtin_names():
    return sorted(_BUILTINS)


def with_domain(f: TargetFunction, domain: Element) -> TargetFunction:
    from dataclasses import replace

    return replace(f, domain=domain)
