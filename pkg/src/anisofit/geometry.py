"""Elements (intervals, axis-aligned rectangles, triangles) and their splits.

All elements are immutable.  Splits return children in a fixed order; the
first child owns points lying on the cut (lower / left convention).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

HALVE_X = 0  # vertical cut: (T_l, T_r)
HALVE_Y = 1  # horizontal cut: (T_d, T_u)


@dataclass(frozen=True)
class Interval1D:
    lo: float
    hi: float
    dyadic_id: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"degenerate interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def area(self) -> float:
        return self.length

    @property
    def center(self) -> np.ndarray:
        return np.array([0.5 * (self.lo + self.hi)])


@dataclass(frozen=True)
class RectElement:
    ix: Interval1D
    iy: Interval1D

    @classmethod
    def from_bounds(cls, x0, x1, y0, y1) -> "RectElement":
        return cls(Interval1D(float(x0), float(x1)), Interval1D(float(y0), float(y1)))

    @property
    def width(self) -> float:
        return self.ix.length

    @property
    def height(self) -> float:
        return self.iy.length

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> np.ndarray:
        return np.array([0.5 * (self.ix.lo + self.ix.hi), 0.5 * (self.iy.lo + self.iy.hi)])

    @property
    def corners(self) -> np.ndarray:
        x0, x1, y0, y1 = self.ix.lo, self.ix.hi, self.iy.lo, self.iy.hi
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


@dataclass(frozen=True)
class TriElement:
    vertices: Tuple[Tuple[float, float], Tuple[float, float], Tuple[float, float]]
    newest_vertex_index: Optional[int] = None
    generation: int = 0

    def __post_init__(self):
        if self.signed_area <= 0.0:
            raise ValueError(f"triangle {self.vertices} is not counterclockwise / non-degenerate")

    @classmethod
    def from_points(cls, pts, newest_vertex_index=None, generation=0) -> "TriElement":
        """Build a triangle, reordering the vertices counterclockwise if needed."""
        pts = [tuple(float(c) for c in p) for p in pts]
        a, b, c = pts
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if cross < 0:
            pts = [a, c, b]
            if newest_vertex_index is not None:
                newest_vertex_index = {0: 0, 1: 2, 2: 1}[newest_vertex_index]
        return cls(tuple(pts), newest_vertex_index, generation)

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @property
    def signed_area(self) -> float:
        (ax, ay), (bx, by), (cx, cy) = self.vertices
        return 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))

    @property
    def area(self) -> float:
        return self.signed_area

    @property
    def center(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def edge_lengths(self) -> np.ndarray:
        """Length of the edge opposite each vertex."""
        p = self.points
        return np.array([np.hypot(*(p[(i + 2) % 3] - p[(i + 1) % 3])) for i in range(3)])


Element = Union[Interval1D, RectElement, TriElement]


def split_interval(iv: Interval1D) -> Tuple[Interval1D, Interval1D]:
    mid = 0.5 * (iv.lo + iv.hi)
    if iv.dyadic_id is None:
        return Interval1D(iv.lo, mid), Interval1D(mid, iv.hi)
    j, n = iv.dyadic_id
    return Interval1D(iv.lo, mid, (j + 1, 2 * n)), Interval1D(mid, iv.hi, (j + 1, 2 * n + 1))


def split_rect(rect: RectElement, axis: int) -> Tuple[RectElement, RectElement]:
    if axis == HALVE_X:
        left, right = split_interval(rect.ix)
        return RectElement(left, rect.iy), RectElement(right, rect.iy)
    if axis == HALVE_Y:
        down, up = split_interval(rect.iy)
        return RectElement(rect.ix, down), RectElement(rect.ix, up)
    raise ValueError(f"unknown axis {axis!r}")


def bisect_triangle(tri: TriElement, i: int) -> Tuple[TriElement, TriElement]:
    """Bisect from vertex ``i`` towards the midpoint of the opposite edge."""
    if i not in (0, 1, 2):
        raise ValueError(f"vertex index must be 0, 1 or 2, got {i!r}")
    v = tri.vertices
    a = v[i]
    b = v[(i + 1) % 3]
    c = v[(i + 2) % 3]
    mid = (0.5 * (b[0] + c[0]), 0.5 * (b[1] + c[1]))
    g = tri.generation + 1
    # both children keep counterclockwise order; the midpoint is their newest vertex
    return TriElement((a, b, mid), 2, g), TriElement((a, mid, c), 1, g)


def longest_edge_vertex(tri: TriElement) -> int:
    """Vertex opposite the longest edge (smallest index on ties)."""
    lengths = tri.edge_lengths()
    return int(np.argmax(lengths >= lengths.max() * (1 - 1e-12)))


def quad_split_triangle(tri: TriElement) -> Tuple[TriElement, ...]:
    a, b, c = tri.vertices
    mab = (0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]))
    mbc = (0.5 * (b[0] + c[0]), 0.5 * (b[1] + c[1]))
    mca = (0.5 * (c[0] + a[0]), 0.5 * (c[1] + a[1]))
    g = tri.generation + 1
    return (
        TriElement((a, mab, mca), None, g),
        TriElement((mab, b, mbc), None, g),
        TriElement((mca, mbc, c), None, g),
        TriElement((mbc, mca, mab), None, g),
    )


def quad_split_rect(rect: RectElement) -> Tuple[RectElement, ...]:
    lo_x, hi_x = split_interval(rect.ix)
    lo_y, hi_y = split_interval(rect.iy)
    return (
        RectElement(lo_x, lo_y),
        RectElement(hi_x, lo_y),
        RectElement(lo_x, hi_y),
        RectElement(hi_x, hi_y),
    )


ISO_VARIANTS = ("quad", "newest_vertex", "longest_edge")


def iso_vertex(tri: TriElement, variant: str) -> int:
    """Bisection vertex mandated by an isotropic rule.

    Root triangles carry no newest vertex; newest-vertex bisection falls back
    to the longest edge on them.
    """
    if variant == "newest_vertex" and tri.newest_vertex_index is not None:
        return tri.newest_vertex_index
    if variant in ("newest_vertex", "longest_edge"):
        return longest_edge_vertex(tri)
    raise ValueError(f"no bisection vertex for variant {variant!r}")


def iso_split(el: Element, variant: str = "quad") -> Tuple[Element, ...]:
    if variant not in ISO_VARIANTS:
        raise ValueError(f"unknown isotropic variant {variant!r}")
    if isinstance(el, RectElement):
        if variant != "quad":
            raise ValueError("rectangles only support the quad split")
        return quad_split_rect(el)
    if isinstance(el, TriElement):
        if variant == "quad":
            return quad_split_triangle(el)
        return bisect_triangle(el, iso_vertex(el, variant))
    if isinstance(el, Interval1D):
        return split_interval(el)
    raise TypeError(f"not an element: {el!r}")


def measures(el: Element) -> Tuple[float, float, float]:
    """(area, diameter h_T, inscribed-disc diameter rho_T)."""
    if isinstance(el, Interval1D):
        return el.length, el.length, el.length
    if isinstance(el, RectElement):
        w, h = el.width, el.height
        return w * h, float(np.hypot(w, h)), min(w, h)
    if isinstance(el, TriElement):
        lengths = el.edge_lengths()
        area = el.area
        return area, float(lengths.max()), 4.0 * area / float(lengths.sum())
    raise TypeError(f"not an element: {el!r}")


def diameter(el: Element) -> float:
    return measures(el)[1]


# ---------------------------------------------------------------------------
# point membership and sampling


def contains(el: Element, x, y=None, tol: float = 1e-12) -> np.ndarray:
    """Closed membership test (with a small relative tolerance)."""
    if isinstance(el, Interval1D):
        x = np.asarray(x, dtype=float)
        eps = tol * el.length
        return (x >= el.lo - eps) & (x <= el.hi + eps)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(el, RectElement):
        ex, ey = tol * el.width, tol * el.height
        return (x >= el.ix.lo - ex) & (x <= el.ix.hi + ex) & (y >= el.iy.lo - ey) & (y <= el.iy.hi + ey)
    lam = barycentric(el, x, y)
    return np.all(lam >= -tol, axis=0)


def barycentric(tri: TriElement, x, y) -> np.ndarray:
    (ax, ay), (bx, by), (cx, cy) = tri.vertices
    det = 2.0 * tri.area
    l1 = ((bx - x) * (cy - y) - (by - y) * (cx - x)) / det
    l2 = ((cx - x) * (ay - y) - (cy - y) * (ax - x)) / det
    return np.stack([l1, l2, 1.0 - l1 - l2])


def assign_points(children: Sequence[Element], x, y=None) -> list:
    """Split point indices among children; points on shared cuts go to the earliest child."""
    x = np.asarray(x, dtype=float)
    remaining = np.arange(x.shape[0])
    out = []
    for k, child in enumerate(children):
        if k == len(children) - 1:
            out.append(remaining)
            break
        if y is None:
            inside = contains(child, x[remaining])
        else:
            inside = contains(child, x[remaining], np.asarray(y)[remaining])
        out.append(remaining[inside])
        remaining = remaining[~inside]
    return out


def lattice(el: Element, n: int = 33) -> Tuple[np.ndarray, ...]:
    """Sample lattice: n points on intervals, n x n grid on rectangles,
    barycentric lattice with n points per edge on triangles."""
    if isinstance(el, Interval1D):
        return (np.linspace(el.lo, el.hi, n),)
    if isinstance(el, RectElement):
        xs = np.linspace(el.ix.lo, el.ix.hi, n)
        ys = np.linspace(el.iy.lo, el.iy.hi, n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return X.ravel(), Y.ravel()
    lam = _bary_lattice(n)
    pts = lam @ el.points
    return pts[:, 0], pts[:, 1]


_BARY_CACHE: dict = {}


def _bary_lattice(n: int) -> np.ndarray:
    if n not in _BARY_CACHE:
        k = n - 1
        rows = [(i, j, k - i - j) for i in range(n) for j in range(n - i)]
        _BARY_CACHE[n] = np.asarray(rows, dtype=float) / k
    return _BARY_CACHE[n]


# ---------------------------------------------------------------------------
# root partitions


def square_root_triangles(rect: RectElement, pattern: str = "diagonal") -> Tuple[TriElement, ...]:
    """Initial triangulation of a rectangle: two triangles along the main
    diagonal, or four triangles meeting at the center ("crisscross")."""
    x0, x1, y0, y1 = rect.ix.lo, rect.ix.hi, rect.iy.lo, rect.iy.hi
    if pattern == "diagonal":
        return (
            TriElement(((x0, y0), (x1, y0), (x1, y1))),
            TriElement(((x0, y0), (x1, y1), (x0, y1))),
        )
    if pattern == "crisscross":
        c = (0.5 * (x0 + x1), 0.5 * (y0 + y1))
        return (
            TriElement((c, (x0, y0), (x1, y0))),
            TriElement((c, (x1, y0), (x1, y1))),
            TriElement((c, (x1, y1), (x0, y1))),
            TriElement((c, (x0, y1), (x0, y0))),
        )
    raise ValueError(f"unknown root pattern {pattern!r}")


def equilateral(side: float = 1.0, origin=(0.0, 0.0)) -> TriElement:
    ox, oy = origin
    return TriElement(((ox, oy), (ox + side, oy), (ox + 0.5 * side, oy + side * np.sqrt(3) / 2)))


def equilateral_with_area(area: float = 1.0) -> TriElement:
    return equilateral(np.sqrt(4.0 * area / np.sqrt(3)))
