"""Experiment drivers: convergence runs, slope fits, the constants table,
adaptation fractions and the 1D maximal function."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from . import shape
from .geometry import Interval1D
from .localerr import combine, local_fit
from .refine import PartitionTree, RefineConfig, refine_levels, run_to_N
from .shape import QuadForm2
from .targets import TargetFunction


@dataclass(frozen=True)
class ConvergenceRecord:
    N: int
    error: float
    rate: float
    scaled: float

    @classmethod
    def make(cls, N: int, error: float, rate: float) -> "ConvergenceRecord":
        return cls(int(N), float(error), float(rate), float(N) ** rate * float(error))


@dataclass(frozen=True)
class ConstantsRow:
    delta: float
    U: float
    I: float
    A: float
    C_U: float
    C_I: float
    C_A: float


def nominal_rate(cfg: RefineConfig, dim: int) -> float:
    """m/d: the N-exponent of the optimal adaptive rate."""
    return cfg.degree / dim


def convergence_run(f: TargetFunction, cfg: RefineConfig, schedule: Sequence[int], roots=None
                    ) -> List[ConvergenceRecord]:
    schedule = [int(n) for n in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    run_cfg = cfg if cfg.max_N == schedule[-1] else _with(cfg, max_N=schedule[-1])
    _, trace = run_to_N(f, run_cfg, roots=roots, schedule=schedule)
    rate = nominal_rate(cfg, f.dim)
    by_n = {row.N: row for row in trace}
    return [ConvergenceRecord.make(n, by_n[n].error, rate) for n in schedule if n in by_n]


def _with(cfg: RefineConfig, **changes) -> RefineConfig:
    from dataclasses import replace

    return replace(cfg, **changes)


def uniform_1d_error(f: TargetFunction, N: int, m: int = 1, p: float = math.inf, n: int = 33) -> float:
    """Global error of the best piecewise polynomial fit on N equal intervals."""
    lo, hi = f.domain.lo, f.domain.hi
    edges = np.linspace(lo, hi, N + 1)
    if m == 1 and math.isinf(p):
        t = np.linspace(0.0, 1.0, n)
        vals = np.asarray(f.eval(edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * t[None, :]), float)
        return float(0.5 * (vals.max(axis=1) - vals.min(axis=1)).max())
    errs = [local_fit(f, Interval1D(a, b), m, p, n).error_value for a, b in zip(edges[:-1], edges[1:])]
    return combine(errs, p)


def uniform_1d_run(f: TargetFunction, schedule: Sequence[int], m: int = 1, p: float = math.inf,
                   n: int = 33) -> List[ConvergenceRecord]:
    return [ConvergenceRecord.make(N, uniform_1d_error(f, N, m, p, n), m) for N in schedule]


def fit_slope(records: Sequence[Union[ConvergenceRecord, tuple]]) -> float:
    """Least-squares slope of log(error) against log(N)."""
    pairs = [(r.N, r.error) if isinstance(r, ConvergenceRecord) else (r[0], r[1]) for r in records]
    if len(pairs) < 3:
        raise ValueError("need at least 3 records")
    N = np.array([a for a, _ in pairs], dtype=float)
    e = np.array([b for _, b in pairs], dtype=float)
    if np.any(e <= 0):
        raise ValueError("errors must be positive to fit a log-log slope")
    return float(np.polyfit(np.log(N), np.log(e), 1)[0])


def maximal_norm_1d(g, x=None) -> float:
    """Trapezoid L1 norm of the centered maximal function of |g| on a uniform grid.

    Windows are symmetric in grid points; values outside the grid count as 0.
    The radius-0 window is the sample itself.
    """
    g = np.abs(np.asarray(g, dtype=float))
    n = g.size
    if n < 2:
        raise ValueError("need at least two samples")
    if x is None:
        x = np.linspace(0.0, 1.0, n)
    x = np.asarray(x, dtype=float)
    h = (x[-1] - x[0]) / (n - 1)
    S = np.concatenate([[0.0], np.cumsum(g)])  # S[i] = sum g[:i]
    idx = np.arange(n)
    M = g.copy()
    for k in range(1, n):
        lo = np.clip(idx - k, 0, n)
        hi = np.clip(idx + k + 1, 0, n)
        M = np.maximum(M, (S[hi] - S[lo]) / (2 * k + 1))
    return float(np.trapezoid(M, dx=h) if hasattr(np, "trapezoid") else np.trapz(M, dx=h))


# --- constants table -------------------------------------------------------------

TABLE_N = 8192
UNIFORM_LEVELS = 6  # two root triangles, quad-split 6 times -> 2 * 4**6 = 8192


def empirical_constants(f: TargetFunction, N: int = TABLE_N, p: float = 2.0, m: int = 2,
                        uniform_levels: int = UNIFORM_LEVELS) -> Dict[str, float]:
    """N * error for uniform, isotropic greedy and anisotropic greedy triangulations."""
    out = {}
    uni = refine_levels(f, RefineConfig(degree=m, p=p, strategy="iso_quad", max_N=10**9), uniform_levels,
                        roots=_two_triangles(f))
    out["C_U"] = uni.N * uni.global_error()
    for key, strat in (("C_I", "iso_newest_vertex"), ("C_A", "aniso_tri")):
        cfg = RefineConfig(degree=m, p=p, strategy=strat, max_N=N)
        _, trace = run_to_N(f, cfg, schedule=[N])
        out[key] = trace[-1].N * trace[-1].error
    return out


def _two_triangles(f: TargetFunction):
    from .geometry import RectElement, square_root_triangles

    if isinstance(f.domain, RectElement):
        return list(square_root_triangles(f.domain, "diagonal"))
    return [f.domain]


def constants_table(deltas: Sequence[float], N: int = TABLE_N, p: float = 2.0, m: int = 2,
                    cells: int = 400, target_factory=None) -> List[ConstantsRow]:
    from .targets import sharp_ring

    make = target_factory or sharp_ring
    rows = []
    for d in deltas:
        f = make(d)
        U = shape.theoretical_constants(f, "U", p, cells)
        I = shape.theoretical_constants(f, "I", p, cells)
        A = shape.theoretical_constants(f, "A_tri", p, cells)
        emp = empirical_constants(f, N, p, m)
        rows.append(ConstantsRow(float(d), U, I, A, emp["C_U"], emp["C_I"], emp["C_A"]))
    return rows


# --- adaptation --------------------------------------------------------------------


def adaptation_fraction(tree: PartitionTree, Q: QuadForm2, threshold: float = 2.0, per_level: bool = False,
                        p: float = 2.0, kappa=None):
    """Share of triangles with sigma_Q(T)_p <= threshold.

    Without ``per_level`` the share is over the current leaves; with it, a
    dict generation -> share over every triangle created at that generation.
    """
    if Q.det == 0:
        raise shape.DegenerateFormError("adaptation needs a non-degenerate quadratic form")
    if kappa is None:
        kappa = shape.load_kappa()

    def ok(node):
        return shape.sigma_adaptation(Q, node.element, p, kappa) <= threshold

    if not per_level:
        leaves = tree.leaf_nodes()
        return sum(ok(n) for n in leaves) / len(leaves)
    out = {}
    for j in sorted({n.generation for n in tree.nodes}):
        nodes = tree.nodes_at_generation(j)
        out[j] = sum(ok(n) for n in nodes) / len(nodes)
    return out


# --- CSV -----------------------------------------------------------------------------


def format_float(v: float) -> str:
    return repr(float(v)) if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))


def records_csv(records: Sequence[ConvergenceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "error", "scaled"])
    for r in records:
        w.writerow([r.N, format_float(r.error), format_float(r.scaled)])
    return buf.getvalue()


def constants_csv(rows: Sequence[ConstantsRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(ConstantsRow)]
    w.writerow(names)
    for r in rows:
        w.writerow([format_float(getattr(r, k)) for k in names])
    return buf.getvalue()


def read_records_csv(text: str, rate: Optional[float] = None) -> List[ConvergenceRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        N, e, s = int(row["N"]), float(row["error"]), float(row["scaled"])
        r = rate if rate is not None else (math.log(s / e) / math.log(N) if e > 0 and N > 1 else 0.0)
        out.append(ConvergenceRecord(N, e, r, s))
    return out
