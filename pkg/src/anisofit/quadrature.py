"""Quadrature rules on intervals, rectangles and triangles."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import Element, Interval1D, RectElement, TriElement


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple  # coordinate arrays (x,) or (x, y)
    weights: np.ndarray
    exact_degree: int


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


# 7-point symmetric rule, exact for degree 5 (barycentric coordinates)
_S15 = np.sqrt(15.0)
_A1, _B1 = (9 - 2 * _S15) / 21, (6 + _S15) / 21
_A2, _B2 = (9 + 2 * _S15) / 21, (6 - _S15) / 21
_W1, _W2 = (155 + _S15) / 1200, (155 - _S15) / 1200
_TRI7_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_A1, _B1, _B1],
        [_B1, _A1, _B1],
        [_B1, _B1, _A1],
        [_A2, _B2, _B2],
        [_B2, _A2, _B2],
        [_B2, _B2, _A2],
    ]
)
_TRI7_W = np.array([0.225, _W1, _W1, _W1, _W2, _W2, _W2])


def _conical(n: int):
    """Collapsed Gauss product rule on the reference simplex, exact to degree 2n-2."""
    u, wu = _gauss(n)
    v, wv = _gauss(n)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv) * (1.0 - U) * 2.0  # normalized so weights sum to 1
    l1 = U.ravel()
    l2 = (V * (1.0 - U)).ravel()
    return np.stack([l1, l2, 1.0 - l1 - l2], axis=1), W.ravel()


@lru_cache(maxsize=None)
def triangle_reference_rule(degree: int = 5, depth: int = 0):
    """Barycentric nodes and weights (summing to 1), optionally on 4**depth sub-triangles."""
    if degree <= 5:
        bary, w = _TRI7_BARY, _TRI7_W
        exact = 5
    else:
        n = (degree + 3) // 2
        bary, w = _conical(n)
        exact = 2 * n - 2
    subs = [np.eye(3)]
    for _ in range(depth):
        nxt = []
        for s in subs:
            a, b, c = s
            ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
            nxt.extend([np.array([a, ab, ca]), np.array([ab, b, bc]), np.array([ca, bc, c]), np.array([bc, ca, ab])])
        subs = nxt
    nodes = np.concatenate([bary @ s for s in subs])
    weights = np.concatenate([w / len(subs) for _ in subs])
    return nodes, weights, exact


def rule_for(el: Element, degree: int = 5, refine: int = 0) -> QuadratureRule:
    """Quadrature on ``el``; ``refine`` > 0 subdivides (sharp targets)."""
    if isinstance(el, Interval1D):
        n = max(5, (degree + 2) // 2)
        x, w = _gauss(n)
        k = 2**refine
        xs = (np.arange(k)[:, None] + x[None, :]).ravel() / k
        ws = np.tile(w, k) / k
        return QuadratureRule((el.lo + el.length * xs,), el.length * ws, 2 * n - 1)
    if isinstance(el, RectElement):
        n = max(5, (degree + 2) // 2)
        x, w = _gauss(n)
        k = 2**refine
        xs = (np.arange(k)[:, None] + x[None, :]).ravel() / k
        ws = np.tile(w, k) / k
        X, Y = np.meshgrid(el.ix.lo + el.width * xs, el.iy.lo + el.height * xs, indexing="ij")
        W = np.outer(ws, ws) * el.area
        return QuadratureRule((X.ravel(), Y.ravel()), W.ravel(), 2 * n - 1)
    if isinstance(el, TriElement):
        bary, w, exact = triangle_reference_rule(degree, refine)
        pts = bary @ el.points
        return QuadratureRule((pts[:, 0], pts[:, 1]), w * el.area, exact)
    raise TypeError(f"not an element: {el!r}")


def integrate(func, el: Element, degree: int = 5, refine: int = 0) -> float:
    rule = rule_for(el, degree, refine)
    return float(np.dot(rule.weights, func(*rule.nodes)))


def integrate_domain(func, domain: Element, cells: int = 200, degree: int = 5) -> float:
    """Composite quadrature over a domain: cells x cells sub-rectangles, or
    4**k sub-triangles with 4**k >= cells**2."""
    if isinstance(domain, RectElement):
        x, w = _gauss(max(3, (degree + 2) // 2))
        edges_x = np.linspace(domain.ix.lo, domain.ix.hi, cells + 1)
        edges_y = np.linspace(domain.iy.lo, domain.iy.hi, cells + 1)
        hx = np.diff(edges_x)[0]
        hy = np.diff(edges_y)[0]
        xs = (edges_x[:-1, None] + hx * x[None, :]).ravel()
        ys = (edges_y[:-1, None] + hy * x[None, :]).ravel()
        wx = np.tile(w, cells) * hx
        wy = np.tile(w, cells) * hy
        total = 0.0
        # row blocks keep memory bounded
        for i0 in range(0, xs.size, 2048):
            X, Y = np.meshgrid(xs[i0:i0 + 2048], ys, indexing="ij")
            total += float(np.sum(np.outer(wx[i0:i0 + 2048], wy) * func(X, Y)))
        return total
    if isinstance(domain, TriElement):
        depth = max(0, int(np.ceil(np.log(max(cells, 1) ** 2) / np.log(4))))
        return integrate(func, domain, degree, min(depth, 8))
    if isinstance(domain, Interval1D):
        return integrate(func, domain, degree, max(0, int(np.log2(max(cells, 1)))))
    raise TypeError(f"not an element: {domain!r}")
