"""Local polynomial fits on elements and the local error values e_{m,T}(f)_p.

Polynomials of total degree m-1 are represented in monomials centered at the
element barycenter and scaled by the element diameter, which keeps the Gram
matrices well conditioned on thin anisotropic elements.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import quadrature
from .geometry import Element, Interval1D, TriElement, contains, diameter, lattice
from .targets import RasterImage, TargetFunction

RCOND_MIN = 1e-12


@dataclass
class LocalFit:
    element: Element
    degree: int  # polynomial degree m - 1
    coefficients: np.ndarray
    error_value: float
    norm_p: float
    degenerate: bool = False
    center: np.ndarray = field(default=None, repr=False)
    scale: float = 1.0

    def __post_init__(self):
        if self.center is None:
            self.center = np.asarray(self.element.center, dtype=float)

    def evaluate(self, *xy) -> np.ndarray:
        V = basis_matrix(self.degree + 1, self.center, self.scale, *xy)
        return V @ self.coefficients

    @property
    def mean_value(self) -> float:
        return float(self.coefficients[0]) if len(self.coefficients) else 0.0


def exponents(m: int, dim: int = 2):
    if dim == 1:
        return [(k,) for k in range(m)]
    return [(i - j, j) for i in range(m) for j in range(i + 1)]


def basis_matrix(m: int, center, scale: float, *xy) -> np.ndarray:
    dim = len(xy)
    cols = []
    if dim == 1:
        t = (np.asarray(xy[0], dtype=float) - center[0]) / scale
        for (k,) in exponents(m, 1):
            cols.append(t**k)
        return np.stack(cols, axis=-1)
    u = (np.asarray(xy[0], dtype=float) - center[0]) / scale
    v = (np.asarray(xy[1], dtype=float) - center[1]) / scale
    for i, j in exponents(m, 2):
        cols.append(u**i * v**j)
    return np.stack(cols, axis=-1)


def _weighted_fit(V, w, values):
    """Weighted least squares; returns (coefficients, degenerate).

    Normal equations when the Gram matrix is well conditioned, otherwise an
    SVD solve on sqrt(w) V, which keeps thin elements accurate. Degenerate
    means the weighted design matrix has condition number above 1/RCOND_MIN.
    """
    G = (V * w[:, None]).T @ V
    if G.shape[0] == 1:
        return np.linalg.solve(G, (V * w[:, None]).T @ values), False
    ev = np.linalg.eigvalsh(G)
    if ev[0] > RCOND_MIN * ev[-1]:
        return np.linalg.solve(G, (V * w[:, None]).T @ values), False
    sw = np.sqrt(np.maximum(w, 0.0))
    coef, _, rank, sv = np.linalg.lstsq(V * sw[:, None], values * sw, rcond=None)
    if rank < V.shape[1] or sv[-1] <= RCOND_MIN * sv[0]:
        return None, True
    return coef, False


def _constant_fallback(k, w, values):
    c = np.zeros(k)
    total = w.sum()
    c[0] = float(np.dot(w, values) / total) if total > 0 else 0.0
    return c


def quad_refinement(f: TargetFunction, el: Element, refine: Optional[int] = None) -> int:
    if refine is not None:
        return refine
    if not f.sharpness_hint:
        return 0
    # enough subdivisions that sub-cells are no wider than the feature scale
    depth = math.ceil(math.log2(max(diameter(el) / f.sharpness_hint, 1.0))) + 1
    return min(depth, 5)


def default_quad_degree(m: int) -> int:
    # residuals of non-polynomial targets need more than the 2(m-1) the
    # Gram matrix alone would require
    return max(6, 2 * m + 2)


def l2_project(f: TargetFunction, el: Element, m: int = 1, quad_degree: Optional[int] = None,
               refine: Optional[int] = None) -> LocalFit:
    """L2(T)-orthogonal projection onto polynomials of degree m-1."""
    if f.image is not None:
        return discrete_l2_project(f.image, el, m)
    deg = quad_degree if quad_degree is not None else default_quad_degree(m)
    rule = quadrature.rule_for(el, deg, quad_refinement(f, el, refine))
    values = np.asarray(f.eval(*rule.nodes), dtype=float)
    scale = diameter(el)
    center = np.asarray(el.center, dtype=float)
    V = basis_matrix(m, center, scale, *rule.nodes)
    coef, degenerate = _weighted_fit(V, rule.weights, values)
    if degenerate:
        coef = _constant_fallback(V.shape[1], rule.weights, values)
    resid = values - V @ coef
    err = math.sqrt(max(float(np.dot(rule.weights, resid * resid)), 0.0))
    return LocalFit(el, m - 1, coef, err, 2.0, degenerate, center, scale)


def linf_best_constant(f: TargetFunction, el: Element, n: int = 33) -> LocalFit:
    """Mid-range constant over a sample lattice; error = half the sampled oscillation."""
    if f.image is not None:
        return discrete_l2_project(f.image, el, 1, p=math.inf)
    pts = lattice(el, n)
    values = np.asarray(f.eval(*pts), dtype=float)
    hi, lo = float(values.max()), float(values.min())
    return LocalFit(el, 0, np.array([0.5 * (hi + lo)]), 0.5 * (hi - lo), math.inf, False,
                    np.asarray(el.center, float), diameter(el))


def minimax_fit(f: TargetFunction, el: Element, m: int = 2, n: int = 33) -> LocalFit:
    """Best uniform approximation on the sample lattice (linear program)."""
    from scipy.optimize import linprog

    if m == 1:
        return linf_best_constant(f, el, n)
    pts = lattice(el, n)
    values = np.asarray(f.eval(*pts), dtype=float)
    scale = diameter(el)
    center = np.asarray(el.center, float)
    V = basis_matrix(m, center, scale, *pts)
    k = V.shape[1]
    ones = np.ones((V.shape[0], 1))
    A = np.block([[V, -ones], [-V, -ones]])
    b = np.concatenate([values, -values])
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    res = linprog(cost, A_ub=A, b_ub=b, bounds=[(None, None)] * k + [(0, None)], method="highs")
    if not res.success:
        raise RuntimeError(f"minimax linear program failed: {res.message}")
    return LocalFit(el, m - 1, res.x[:k], float(res.x[-1]), math.inf, False, center, scale)


def lp_error(f: TargetFunction, el: Element, m: int = 1, p: float = 2.0, n: int = 33,
             linf_method: str = "l2_residual", refine: Optional[int] = None) -> float:
    """Estimate of e_{m,T}(f)_p within a fixed factor of the true best error."""
    return local_fit(f, el, m, p, n, linf_method, refine).error_value


def local_fit(f: TargetFunction, el: Element, m: int = 1, p: float = 2.0, n: int = 33,
              linf_method: str = "l2_residual", refine: Optional[int] = None) -> LocalFit:
    if not p >= 1:
        raise ValueError(f"p must be in [1, inf], got {p}")
    if f.image is not None:
        return discrete_l2_project(f.image, el, m, p=p)
    if math.isinf(p):
        if m == 1:
            return linf_best_constant(f, el, n)
        if linf_method == "minimax":
            return minimax_fit(f, el, m, n)
        fit = l2_project(f, el, m, refine=refine)
        pts = lattice(el, n)
        resid = np.asarray(f.eval(*pts), float) - fit.evaluate(*pts)
        fit.error_value = float(np.abs(resid).max())
        fit.norm_p = math.inf
        return fit
    fit = l2_project(f, el, m, refine=refine)
    if p != 2.0:
        rule = quadrature.rule_for(el, default_quad_degree(m), quad_refinement(f, el, refine))
        resid = np.abs(np.asarray(f.eval(*rule.nodes), float) - fit.evaluate(*rule.nodes))
        fit.error_value = float(np.dot(rule.weights, resid**p)) ** (1.0 / p)
        fit.norm_p = p
    return fit


def interpolate_linear(f: TargetFunction, tri: TriElement, n: int = 33) -> LocalFit:
    """Affine interpolant at the vertices; error = sampled max |f - I f|."""
    pts = tri.points
    fv = np.asarray(f.eval(pts[:, 0], pts[:, 1]), dtype=float)
    scale = diameter(tri)
    center = np.asarray(tri.center, float)
    V = basis_matrix(2, center, scale, pts[:, 0], pts[:, 1])
    coef = np.linalg.solve(V, fv)
    xs, ys = lattice(tri, n)
    resid = np.asarray(f.eval(xs, ys), float) - basis_matrix(2, center, scale, xs, ys) @ coef
    return LocalFit(tri, 1, coef, float(np.abs(resid).max()), math.inf, False, center, scale)


def discrete_l2_project(img: RasterImage, el: Element, m: int = 1, pixels: Optional[np.ndarray] = None,
                        p: float = 2.0, centers=None) -> LocalFit:
    """Least squares over the pixel centers in ``el``; unnormalized l2 residual.

    ``pixels`` restricts the candidate set (indices into the row-major image);
    without it, membership is tested against all pixel centers.
    """
    if centers is None:
        centers = img.pixel_centers()
    px, py = centers
    if pixels is None:
        pixels = np.nonzero(contains(el, px, py))[0]
    scale = diameter(el)
    center = np.asarray(el.center, float)
    k = len(exponents(m, 2))
    if pixels.size == 0:
        return LocalFit(el, m - 1, np.zeros(k), 0.0, p, True, center, scale)
    x, y, values = px[pixels], py[pixels], img.samples[pixels]
    V = basis_matrix(m, center, scale, x, y)
    degenerate = False
    if math.isinf(p) and m == 1:
        hi, lo = float(values.max()), float(values.min())
        coef = np.zeros(k)
        coef[0] = 0.5 * (hi + lo)
        return LocalFit(el, 0, coef, 0.5 * (hi - lo), p, False, center, scale)
    if pixels.size < k:
        coef, degenerate = None, True
    else:
        coef, degenerate = _weighted_fit(V, np.ones(pixels.size), values)
    if degenerate:
        coef = _constant_fallback(k, np.ones(pixels.size), values)
    resid = np.abs(values - V @ coef)
    if math.isinf(p):
        err = float(resid.max())
    else:
        err = float(np.sum(resid**p)) ** (1.0 / p)
    return LocalFit(el, m - 1, coef, err, p, degenerate and pixels.size > 1, center, scale)


def combine(errors, p: float) -> float:
    """(sum e^p)^(1/p), or max for p = inf."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        return 0.0
    if math.isinf(p):
        return float(errors.max())
    if p == 2.0:
        return float(np.sqrt(np.dot(errors, errors)))
    return float(np.sum(errors**p)) ** (1.0 / p)

