"""Shape functions, optimal element shapes, adaptation measures and the
theoretical convergence constants."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, Optional, Tuple

import numpy as np

from . import localerr
from .geometry import RectElement, TriElement
from .quadrature import integrate_domain
from .targets import TargetFunction, cubic_form, quadratic_form


@dataclass(frozen=True)
class LinearForm2:
    qx: float
    qy: float


@dataclass(frozen=True)
class QuadForm2:
    """a x^2 + 2 b x y + c y^2."""

    a: float
    b: float
    c: float

    @property
    def det(self) -> float:
        return self.a * self.c - self.b * self.b

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]])

    def absolute(self) -> "QuadForm2":
        w, v = np.linalg.eigh(self.matrix)
        m = (v * np.abs(w)) @ v.T
        return QuadForm2(m[0, 0], m[0, 1], m[1, 1])

    def compose(self, phi) -> "QuadForm2":
        """q o phi for a 2x2 linear map."""
        phi = np.asarray(phi, dtype=float)
        m = phi.T @ self.matrix @ phi
        return QuadForm2(m[0, 0], m[0, 1], m[1, 1])

    def target(self, domain=None) -> TargetFunction:
        if domain is None:
            return quadratic_form(self.a, self.b, self.c)
        return quadratic_form(self.a, self.b, self.c, domain=domain)


@dataclass(frozen=True)
class CubicForm2:
    """a x^3 + b x^2 y + c x y^2 + d y^3."""

    a: float
    b: float
    c: float
    d: float

    def target(self) -> TargetFunction:
        return cubic_form(self.a, self.b, self.c, self.d)


# --- piecewise constants on rectangles -------------------------------------


def rect_constant(p: float) -> float:
    """C_p = (2 / ((p+1)(p+2)))^(1/p); C_inf = 1."""
    if math.isinf(p):
        return 1.0
    return (2.0 / ((p + 1.0) * (p + 2.0))) ** (1.0 / p)


def K_rect(p: float, q: LinearForm2) -> float:
    return rect_constant(p) * math.sqrt(abs(q.qx * q.qy))


class DegenerateFormError(ValueError):
    """The form has a null direction: optimal elements are unbounded."""


def optimal_rect(q: LinearForm2, area: float) -> RectElement:
    """Centered rectangle with |I|/|J| = |q_y|/|q_x| and |I||J| = area."""
    if q.qx * q.qy == 0:
        raise DegenerateFormError("q_x q_y = 0: optimal rectangles are infinitely long")
    if area <= 0:
        raise ValueError("area must be positive")
    w = math.sqrt(area * abs(q.qy) / abs(q.qx))
    h = area / w
    return RectElement.from_bounds(-w / 2, w / 2, -h / 2, h / 2)


def a_measure(q: LinearForm2, rect: RectElement) -> float:
    """|log2(|I| |q_x| / (|J| |q_y|))|, +inf for degenerate q."""
    if q.qx * q.qy == 0:
        return math.inf
    return abs(math.log2(rect.width * abs(q.qx) / (rect.height * abs(q.qy))))


# --- piecewise affine / quadratic on triangles -------------------------------


def disc(cf: CubicForm2) -> float:
    a, b, c, d = cf.a, cf.b, cf.c, cf.d
    return b * b * c * c - 4 * a * c**3 - 4 * b**3 * d + 18 * a * b * c * d - 27 * a * a * d * d


def _p_key(p: float) -> str:
    return "inf" if math.isinf(p) else repr(float(p))


KappaTable = Dict[Tuple[str, int, str], float]


def _kappa_lookup(kappa: Optional[KappaTable], name: str, p: float, sign: int) -> float:
    table = load_kappa() if kappa is None else kappa
    key = (name, _p_key(p), "+" if sign > 0 else "-")
    try:
        return table[key]
    except KeyError:
        raise KeyError(f"no {name} constant for p={_p_key(p)} sign {key[2]}") from None


def K2(p: float, Q: QuadForm2, kappa: Optional[KappaTable] = None) -> float:
    d = Q.det
    if d == 0:
        return 0.0
    return _kappa_lookup(kappa, "kappa", p, 1 if d > 0 else -1) * math.sqrt(abs(d))


def K3(p: float, C: CubicForm2, kappa3: Optional[KappaTable] = None) -> float:
    d = disc(C)
    if d == 0:
        return 0.0
    return _kappa_lookup(kappa3, "kappa3", p, 1 if d > 0 else -1) * abs(d) ** 0.25


# --- the constants file --------------------------------------------------------

KAPPA_FILE = "kappa.txt"


def settings_hash(settings: dict) -> str:
    return hashlib.sha256(json.dumps(settings, sort_keys=True).encode()).hexdigest()[:12]


def parse_kappa(text: str) -> KappaTable:
    table: KappaTable = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5 or parts[0] not in ("kappa", "kappa3") or parts[2] not in "+-":
            raise ValueError(f"constants file line {lineno}: expected 'kappa p sign value hash', got {line!r}")
        name, p, sign, value, _ = parts
        table[(name, _p_key(float(p)), sign)] = float(value)
    return table


def format_kappa(rows) -> str:
    """rows: iterable of (name, p, sign, value, hash)."""
    lines = ["# name p sign value oracle-settings-hash"]
    for name, p, sign, value, h in rows:
        lines.append(f"{name} {_p_key(p)} {sign} {value!r} {h}")
    return "\n".join(lines) + "\n"


@lru_cache(maxsize=1)
def _packaged_kappa_text() -> str:
    return resources.files("anisofit").joinpath("data", KAPPA_FILE).read_text()


def load_kappa(path=None) -> KappaTable:
    if path is None:
        return parse_kappa(_packaged_kappa_text())
    with open(path) as fh:
        return parse_kappa(fh.read())


def kappa_file_hash(path=None) -> str:
    text = _packaged_kappa_text() if path is None else open(path).read()
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# --- brute-force shape optimization ------------------------------------------


def reference_form(m: int, sign: int):
    if m == 2:
        return QuadForm2(1.0, 0.0, 1.0 if sign > 0 else -1.0)
    if m == 3:
        # disc(3x^2y - y^3) = 108 > 0, disc(x^3 + y^3) = -27 < 0
        return CubicForm2(0.0, 3.0, 0.0, -1.0) if sign > 0 else CubicForm2(1.0, 0.0, 0.0, 1.0)
    raise ValueError("shape optimization implemented for m in {2, 3}")


def form_invariant(form) -> float:
    """|det|^(1/2) for quadratic forms, |disc|^(1/4) for cubic forms."""
    if isinstance(form, QuadForm2):
        return math.sqrt(abs(form.det))
    return abs(disc(form)) ** 0.25


def element_error(form, tri: TriElement, p: float, n: int = 25) -> float:
    """e_{m,T}(q)_p for a homogeneous form; true minimax on the lattice when p = inf."""
    m = 2 if isinstance(form, QuadForm2) else 3
    f = form.target()
    if math.isinf(p):
        return localerr.minimax_fit(f, tri, m, n).error_value
    return localerr.lp_error(f, tri, m, p, n)


def unit_triangle(params) -> TriElement:
    """Area-1 triangle from (log a, b, theta): (0,0), (a,0), (b, 2/a), rotated by theta."""
    s, b, theta = params
    a = math.exp(s)
    pts = np.array([[0.0, 0.0], [a, 0.0], [b, 2.0 / a]])
    c, si = math.cos(theta), math.sin(theta)
    pts = pts @ np.array([[c, si], [-si, c]])
    pts -= pts.mean(axis=0)
    return TriElement(tuple(map(tuple, pts)))


@dataclass
class OracleResult:
    value: float
    triangle: TriElement
    converged: bool
    settings: dict


def kappa_oracle(p: float, sign: int, m: int = 2, n: int = 25, starts: int = 12, seed: int = 0,
                 maxiter: int = 400) -> OracleResult:
    """Minimize the local error of the reference form over area-1 triangles."""
    from scipy.optimize import minimize

    form = reference_form(m, sign)
    rng = np.random.default_rng(seed)
    eq = math.log(math.sqrt(4.0 / math.sqrt(3.0)))

    def objective(x):
        try:
            return element_error(form, unit_triangle(x), p, n)
        except ValueError:
            return math.inf

    inits = [np.array([eq, math.exp(eq) / 2, 0.0])]
    for _ in range(starts - 1):
        s = rng.uniform(-1.0, 1.0)
        inits.append(np.array([s, rng.uniform(-0.5, 1.5) * math.exp(s), rng.uniform(0, math.pi)]))
    best = None
    converged = False
    for x0 in inits:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": maxiter})
        if best is None or res.fun < best.fun:
            best = res
        converged = converged or bool(res.success)
    settings = {"p": _p_key(p), "sign": sign, "m": m, "n": n, "starts": starts, "seed": seed, "maxiter": maxiter}
    return OracleResult(float(best.fun) / form_invariant(form), unit_triangle(best.x), converged, settings)


def build_kappa_rows(ps=(2.0, math.inf), ms=(2,), **oracle_kw):
    rows = []
    for m in ms:
        for p in ps:
            for sign in (1, -1):
                res = kappa_oracle(p, sign, m=m, **oracle_kw)
                rows.append(("kappa" if m == 2 else "kappa3", p, "+" if sign > 0 else "-", res.value,
                             settings_hash(res.settings)))
    return rows


def sigma_adaptation(Q: QuadForm2, tri: TriElement, p: float = 2.0, kappa: Optional[KappaTable] = None,
                     n: int = 25) -> float:
    """e_{2,T}(q)_p / (|T|^(1/tau) K_{2,p}(q)) with 1/tau = 1/p + 1."""
    if Q.det == 0:
        raise DegenerateFormError("sigma is undefined for degenerate quadratic forms")
    inv_tau = (0.0 if math.isinf(p) else 1.0 / p) + 1.0
    return element_error(Q, tri, p, n) / (tri.area**inv_tau * K2(p, Q, kappa))


# --- theoretical constants ---------------------------------------------------------


def _lq(values_fn, domain, q: float, cells: int) -> float:
    if math.isinf(q):
        from .geometry import lattice

        xs, ys = lattice(domain, 4 * cells + 1)
        return float(np.max(values_fn(xs, ys)))
    return integrate_domain(lambda x, y: values_fn(x, y) ** q, domain, cells) ** (1.0 / q)


def hessian_norm(f: TargetFunction):
    """Pointwise spectral norm of the Hessian."""

    def g(x, y):
        fxx, fxy, fyy = f.hess(x, y)
        half_tr = 0.5 * (fxx + fyy)
        rad = np.sqrt(0.25 * (fxx - fyy) ** 2 + fxy**2)
        return np.abs(half_tr) + rad

    return g


def theoretical_constants(f: TargetFunction, which: str, p: float = 2.0, cells: int = 400,
                          tau: Optional[float] = None) -> float:
    """U = ||d2f||_{L^p}, I = ||d2f||_{L^tau}, A_tri = ||sqrt|det d2f| ||_{L^tau}
    (1/tau = 1/p + 1), A_rect = ||sqrt|f_x f_y| ||_{L^tau} (1/tau = 1/p + 1/2).
    ``tau`` overrides the exponent of I, A_tri and A_rect."""
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    if tau is not None:
        inv_p = 1.0 / tau - (0.5 if which == "A_rect" else 1.0)
    if which == "A_rect":
        if f.grad is None:
            raise ValueError(f"{f.name} has no gradient")

        def g(x, y):
            fx, fy = f.grad(x, y)
            return np.sqrt(np.abs(fx * fy))

        return _lq(g, f.domain, 1.0 / (inv_p + 0.5), cells)
    if f.hess is None:
        raise ValueError(f"{f.name} has no Hessian")
    if which == "U":
        return _lq(hessian_norm(f), f.domain, p, cells)
    if which == "I":
        return _lq(hessian_norm(f), f.domain, 1.0 / (inv_p + 1.0), cells)
    if which == "A_tri":
        def g(x, y):
            fxx, fxy, fyy = f.hess(x, y)
            return np.sqrt(np.abs(fxx * fyy - fxy * fxy))

        return _lq(g, f.domain, 1.0 / (inv_p + 1.0), cells)
    raise ValueError(f"unknown constant {which!r}; expected U, I, A_tri or A_rect")

