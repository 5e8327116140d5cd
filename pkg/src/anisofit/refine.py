"""Greedy refinement engine.

A :class:`PartitionTree` keeps every element ever created; its leaves form
the current partition and a max-heap keyed by (local error, -creation index)
selects the next element to split.  Split decisions are pluggable: fixed
isotropic rules, or the anisotropic rules that compare the candidate splits
(optionally with a safety split when no candidate reduces the error by the
factor ``rho``).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import localerr
from .geometry import (
    HALVE_X,
    HALVE_Y,
    Element,
    Interval1D,
    RectElement,
    TriElement,
    assign_points,
    bisect_triangle,
    iso_split,
    iso_vertex,
    longest_edge_vertex,
    split_interval,
    split_rect,
    square_root_triangles,
)
from .localerr import LocalFit, combine
from .targets import TargetFunction

STRATEGIES = (
    "greedy_1d",
    "iso_quad",
    "iso_newest_vertex",
    "iso_longest_edge",
    "aniso_rect",
    "aniso_rect_modified",
    "aniso_tri",
    "aniso_tri_modified",
)
DECISION_NORMS = ("lp", "l2_projection", "linf_interpolation")
SAFETY_KINDS = ("longest_edge", "newest_vertex")

# split-code width in the tree bitstream
SPLIT_CODE_BITS = {
    "greedy_1d": 0,
    "iso_quad": 0,
    "iso_newest_vertex": 0,
    "iso_longest_edge": 0,
    "aniso_rect": 1,
    "aniso_rect_modified": 1,
    "aniso_tri": 2,
    "aniso_tri_modified": 2,
}


@dataclass(frozen=True)
class RefineConfig:
    degree: int = 1  # m: polynomials of degree m - 1
    p: float = math.inf
    strategy: str = "greedy_1d"
    decision_norm: str = "lp"
    rho: float = 1.0 / math.sqrt(2.0)
    safety_kind: str = "longest_edge"
    samples: int = 33
    decision_samples: Optional[int] = None
    quad_refine: Optional[int] = None
    max_N: int = 256
    root_pattern: str = "diagonal"
    dense_trace_until: int = 1024
    checkpoints_per_octave: int = 8

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.decision_norm not in DECISION_NORMS:
            raise ValueError(f"unknown decision_norm {self.decision_norm!r}")
        if self.safety_kind not in SAFETY_KINDS:
            raise ValueError(f"unknown safety_kind {self.safety_kind!r}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not self.p >= 1.0:
            raise ValueError("p must lie in [1, inf]")
        if self.degree not in (1, 2, 3):
            raise ValueError("degree m must be 1, 2 or 3")
        if self.decision_norm == "linf_interpolation" and (
            self.degree != 2 or not self.strategy.startswith("aniso_tri")
        ):
            raise ValueError("linf_interpolation decisions need triangles and m = 2")

    @property
    def element_kind(self) -> str:
        if self.strategy == "greedy_1d":
            return "interval"
        if self.strategy.startswith("aniso_rect"):
            return "rect"
        if self.strategy == "iso_quad":
            return "any"
        return "tri"

    @property
    def modified(self) -> bool:
        return self.strategy.endswith("_modified")

    def as_dict(self) -> dict:
        from dataclasses import asdict

        d = asdict(self)
        d["p"] = "inf" if math.isinf(self.p) else self.p
        return d


@dataclass
class Node:
    element: Element
    parent: int
    index: int
    fit: Optional[LocalFit] = None
    children: Tuple[int, ...] = ()
    split: Optional[int] = None  # axis or vertex code of the split applied
    kind: str = "root"  # how this node was created: root | iso | greedy | safety
    generation: int = 0
    pixels: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def error(self) -> float:
        return self.fit.error_value if self.fit is not None else 0.0


@dataclass
class SplitReport:
    leaf: int
    decision: Optional[int]
    kind: str
    parent_error: float
    child_errors: Tuple[float, ...]
    children: Tuple[int, ...] = ()


class Estimator:
    """Local fits of the target on elements, with the configured norm."""

    def __init__(self, target: TargetFunction, cfg: RefineConfig):
        self.target = target
        self.cfg = cfg
        self.m = cfg.degree
        self.p = cfg.p
        self.raster = target.image is not None
        if self.raster:
            self.centers = target.image.pixel_centers()

    # -- pixel payloads (raster targets only)
    def root_payloads(self, roots: Sequence[Element]):
        if not self.raster:
            return [None] * len(roots)
        return assign_points(roots, *self.centers)

    def split_payload(self, pixels, children: Sequence[Element]):
        if pixels is None:
            return [None] * len(children)
        px, py = self.centers
        parts = assign_points(children, px[pixels], py[pixels])
        return [pixels[part] for part in parts]

    # -- fits
    def fit(self, el: Element, pixels=None) -> LocalFit:
        if self.raster:
            return localerr.discrete_l2_project(self.target.image, el, self.m, pixels=pixels, p=self.p,
                                                centers=self.centers)
        return localerr.local_fit(self.target, el, self.m, self.p, self.cfg.samples, refine=self.cfg.quad_refine)

    def decision_value(self, el: Element, pixels=None, fit: Optional[LocalFit] = None) -> float:
        norm = self.cfg.decision_norm
        if norm == "lp":
            return (fit or self.fit(el, pixels)).error_value
        if norm == "l2_projection":
            if self.raster:
                return localerr.discrete_l2_project(self.target.image, el, self.m, pixels=pixels, p=2.0,
                                                    centers=self.centers).error_value
            return localerr.l2_project(self.target, el, self.m, refine=self.cfg.quad_refine).error_value
        n = self.cfg.decision_samples or self.cfg.samples
        if self.raster:
            raise ValueError("linf_interpolation decisions need an analytic target")
        return localerr.interpolate_linear(self.target, el, n).error_value

    def combine_decision(self, values) -> float:
        norm = self.cfg.decision_norm
        if norm == "lp":
            return combine(values, self.p)
        if norm == "l2_projection":
            return combine(values, 2.0)
        return float(sum(values))


@dataclass
class Candidate:
    code: int
    children: Tuple[Element, ...]
    payloads: list
    fits: Optional[List[LocalFit]]
    value: float


def _evaluate_candidate(est: Estimator, code, children, pixels) -> Candidate:
    payloads = est.split_payload(pixels, children)
    fits = None
    if est.cfg.decision_norm == "lp":
        fits = [est.fit(c, pl) for c, pl in zip(children, payloads)]
        values = [f.error_value for f in fits]
    else:
        values = [est.decision_value(c, pl) for c, pl in zip(children, payloads)]
    return Candidate(code, tuple(children), payloads, fits, est.combine_decision(values))


def _try_candidate(est: Estimator, code, make, el, pixels) -> Candidate:
    # children that collapse in floating point cannot be split further;
    # such a candidate is never preferred
    try:
        children = make(el, code)
    except ValueError:
        return Candidate(code, (), [], None, math.inf)
    return _evaluate_candidate(est, code, children, pixels)


def _pick_valid(cands, preferred):
    if cands[preferred].children:
        return preferred
    valid = [i for i, c in enumerate(cands) if c.children]
    if not valid:
        raise ArithmeticError("element too thin to split in floating point")
    return min(valid, key=lambda i: cands[i].value)


def _parent_decision_value(est: Estimator, node: Node) -> float:
    if est.cfg.decision_norm == "lp":
        return node.error
    return est.decision_value(node.element, node.pixels)


def choose_rect_split(est: Estimator, node: Node):
    """Returns (axis, kind, candidates)."""
    rect = node.element
    cands = [_try_candidate(est, code, split_rect, rect, node.pixels) for code in (HALVE_Y, HALVE_X)]
    e_h, e_v = cands[0].value, cands[1].value
    greedy = 0 if e_h <= e_v else 1
    if not est.cfg.modified or min(e_h, e_v) <= est.cfg.rho * _parent_decision_value(est, node):
        return cands[_pick_valid(cands, greedy)].code, "greedy", cands
    safe = 0 if rect.width <= rect.height else 1
    return cands[_pick_valid(cands, safe)].code, "safety", cands


def safety_vertex(tri: TriElement, kind: str) -> int:
    if kind == "newest_vertex" and tri.newest_vertex_index is not None:
        return tri.newest_vertex_index
    return longest_edge_vertex(tri)


def choose_tri_split(est: Estimator, node: Node):
    """Returns (vertex, kind, candidates)."""
    tri = node.element
    cands = [_try_candidate(est, i, bisect_triangle, tri, node.pixels) for i in range(3)]
    values = [c.value for c in cands]
    best = int(np.argmin(values))  # first minimum: smallest index on ties
    if not est.cfg.modified or values[best] <= est.cfg.rho * _parent_decision_value(est, node):
        return _pick_valid(cands, best), "greedy", cands
    return _pick_valid(cands, safety_vertex(tri, est.cfg.safety_kind)), "safety", cands


class PartitionTree:
    def __init__(self, roots: Sequence[Element], cfg: RefineConfig, estimator: Optional[Estimator] = None):
        self.cfg = cfg
        self.estimator = estimator
        self.nodes: List[Node] = []
        self.roots: List[int] = []
        self._leaves: set = set()
        self._heap: list = []
        self.frozen: set = set()
        payloads = estimator.root_payloads(roots) if estimator is not None else [None] * len(roots)
        for el, pl in zip(roots, payloads):
            idx = self._add(el, -1, "root", 0, pl)
            self.roots.append(idx)

    # -- bookkeeping
    def _add(self, el, parent, kind, generation, pixels, fit=None) -> int:
        idx = len(self.nodes)
        if fit is None and self.estimator is not None:
            fit = self.estimator.fit(el, pixels)
        node = Node(el, parent, idx, fit, (), None, kind, generation, pixels)
        self.nodes.append(node)
        self._leaves.add(idx)
        heapq.heappush(self._heap, (-node.error, idx))
        return idx

    @property
    def N(self) -> int:
        return len(self._leaves)

    def leaves(self) -> List[int]:
        return sorted(self._leaves)

    def leaf_nodes(self) -> List[Node]:
        return [self.nodes[i] for i in self.leaves()]

    @property
    def eta(self) -> float:
        top = -self._heap[0][0] if self._heap else 0.0
        return max([top] + [self.nodes[i].error for i in self.frozen])

    def global_error(self) -> float:
        errs = [self.nodes[i].error for i in self.leaves()]
        if math.isinf(self.cfg.p):
            return max(errs) if errs else 0.0
        return math.fsum(e**self.cfg.p for e in errs) ** (1.0 / self.cfg.p)

    def select_leaf(self) -> int:
        """Leaf of maximal error; ties go to the oldest leaf."""
        if not self._heap:
            raise IndexError("no splittable leaf left")
        return self._heap[0][1]

    # -- splitting
    def decide(self, idx: int):
        """(split code, kind, children elements, payloads, fits or None)."""
        node = self.nodes[idx]
        strategy = self.cfg.strategy
        el = node.element
        if strategy == "greedy_1d":
            children = split_interval(el)
            return None, "iso", children, None, None
        if strategy == "iso_quad":
            return None, "iso", iso_split(el, "quad"), None, None
        if strategy in ("iso_newest_vertex", "iso_longest_edge"):
            variant = strategy[4:]
            i = iso_vertex(el, variant)
            return i, "iso", bisect_triangle(el, i), None, None
        if self.estimator is None:
            raise RuntimeError("anisotropic decisions need an estimator")
        if strategy.startswith("aniso_rect"):
            code, kind, cands = choose_rect_split(self.estimator, node)
        else:
            code, kind, cands = choose_tri_split(self.estimator, node)
        chosen = next(c for c in cands if c.code == code)
        return code, kind, chosen.children, chosen.payloads, chosen.fits

    def split(self, idx: int, code, kind, children, payloads=None, fits=None) -> Tuple[int, ...]:
        node = self.nodes[idx]
        if not node.is_leaf:
            raise ValueError(f"node {idx} is already split")
        if payloads is None:
            payloads = (self.estimator.split_payload(node.pixels, children)
                        if self.estimator is not None else [None] * len(children))
        if fits is None:
            fits = [None] * len(children)
        self._leaves.discard(idx)
        kids = tuple(
            self._add(c, idx, kind, node.generation + 1, pl, ft) for c, pl, ft in zip(children, payloads, fits)
        )
        node.children = kids
        node.split = code
        node.pixels = None  # children own the pixels now
        return kids

    def refine_step(self) -> SplitReport:
        if self.N >= self.cfg.max_N:
            raise RuntimeError(f"leaf count {self.N} already reached max_N={self.cfg.max_N}")
        while True:
            idx = self.select_leaf()
            heapq.heappop(self._heap)
            try:
                code, kind, children, payloads, fits = self.decide(idx)
                break
            except ArithmeticError:
                # no split survives rounding; keep the leaf but stop offering it
                self.frozen.add(idx)
        kids = self.split(idx, code, kind, children, payloads, fits)
        return SplitReport(idx, code, kind, self.nodes[idx].error, tuple(self.nodes[k].error for k in kids), kids)

    def _remove_from_heap(self, idxs):
        drop = set(idxs)
        self._heap = [h for h in self._heap if h[1] not in drop]
        heapq.heapify(self._heap)

    def refine_all(self) -> List[SplitReport]:
        """Split every current leaf once with the strategy's rule (one level)."""
        targets = self.leaves()
        self._remove_from_heap(targets)
        reports = []
        for idx in targets:
            code, kind, children, payloads, fits = self.decide(idx)
            kids = self.split(idx, code, kind, children, payloads, fits)
            reports.append(SplitReport(idx, code, kind, self.nodes[idx].error,
                                       tuple(self.nodes[k].error for k in kids), kids))
        return reports

    # -- inspection
    def nodes_at_generation(self, j: int) -> List[Node]:
        return [n for n in self.nodes if n.generation == j]

    def safety_fraction(self) -> float:
        """Share of splits taken by the safety rule."""
        kinds = [self.nodes[n.children[0]].kind for n in self.nodes if n.children]
        if not kinds:
            return 0.0
        return sum(k == "safety" for k in kinds) / len(kinds)

    def total_area(self) -> float:
        return math.fsum(self.nodes[i].element.area for i in self.leaves())


def initial_elements(target: TargetFunction, cfg: RefineConfig) -> List[Element]:
    dom = target.domain
    kind = cfg.element_kind
    if kind == "interval":
        if not isinstance(dom, Interval1D):
            raise ValueError("greedy_1d needs a 1D target")
        return [dom if dom.dyadic_id is not None else Interval1D(dom.lo, dom.hi, (0, 0))]
    if kind == "rect":
        if not isinstance(dom, RectElement):
            raise ValueError(f"{cfg.strategy} needs a rectangular domain")
        return [dom]
    if isinstance(dom, TriElement):
        return [dom]
    if isinstance(dom, RectElement):
        if kind == "any":
            return [dom]
        return list(square_root_triangles(dom, cfg.root_pattern))
    raise ValueError(f"{cfg.strategy} cannot start from {type(dom).__name__}")


def build_tree(target: TargetFunction, cfg: RefineConfig, roots: Optional[Sequence[Element]] = None) -> PartitionTree:
    if roots is None:
        roots = initial_elements(target, cfg)
    return PartitionTree(roots, cfg, Estimator(target, cfg))


@dataclass
class TraceRow:
    N: int
    error: float
    eta: float


def _checkpoints(cfg: RefineConfig):
    """Every N up to dense_trace_until, then geometric spacing."""
    n = 1
    while True:
        if n <= cfg.dense_trace_until:
            yield n
            n += 1
        else:
            n = max(n + 1, int(math.ceil(n * 2 ** (1.0 / cfg.checkpoints_per_octave))))
            yield n


def run_to_N(target: TargetFunction, cfg: RefineConfig, roots=None, schedule: Optional[Sequence[int]] = None,
             tree: Optional[PartitionTree] = None):
    """Greedy loop until the leaf count reaches cfg.max_N.

    The trace holds (N, global error, eta) at every scheduled N (the first
    time the leaf count reaches it), or at the default checkpoints.
    """
    if tree is None:
        tree = build_tree(target, cfg, roots)
    if cfg.max_N < tree.N:
        raise ValueError(f"max_N={cfg.max_N} below the initial leaf count {tree.N}")
    if schedule is not None:
        marks = iter(sorted(set(int(s) for s in schedule)))
    else:
        marks = _checkpoints(cfg)
    trace: List[TraceRow] = []
    nxt = next(marks, None)
    while True:
        if nxt is not None and tree.N >= nxt:
            trace.append(TraceRow(tree.N, tree.global_error(), tree.eta))
            while nxt is not None and nxt <= tree.N:
                nxt = next(marks, None)
        if tree.N >= cfg.max_N:
            break
        tree.refine_step()
    if not trace or trace[-1].N != tree.N:
        trace.append(TraceRow(tree.N, tree.global_error(), tree.eta))
    return tree, trace


def refine_levels(target: TargetFunction, cfg: RefineConfig, levels: int, roots=None) -> PartitionTree:
    """Apply the strategy's split rule to every leaf, ``levels`` times."""
    tree = build_tree(target, cfg, roots)
    for _ in range(levels):
        tree.refine_all()
    return tree


# -- module-level entry points mirroring the tree methods


def select_leaf(tree: PartitionTree) -> int:
    return tree.select_leaf()


def refine_step(tree: PartitionTree) -> SplitReport:
    return tree.refine_step()


def decide_rect(f: TargetFunction, rect: RectElement, cfg: RefineConfig):
    """Stand-alone decision on one rectangle: (axis, 'greedy'|'safety', (e_h, e_v))."""
    est = Estimator(f, cfg)
    node = Node(rect, -1, 0, est.fit(rect, est.root_payloads([rect])[0]), pixels=est.root_payloads([rect])[0])
    axis, kind, cands = choose_rect_split(est, node)
    return axis, kind, tuple(c.value for c in cands)


def decide_tri(f: TargetFunction, tri: TriElement, cfg: RefineConfig):
    """Stand-alone decision on one triangle: (vertex, 'greedy'|'safety', (e_0, e_1, e_2))."""
    est = Estimator(f, cfg)
    pixels = est.root_payloads([tri])[0]
    node = Node(tri, -1, 0, est.fit(tri, pixels), pixels=pixels)
    vertex, kind, cands = choose_tri_split(est, node)
    return vertex, kind, tuple(c.value for c in cands)
