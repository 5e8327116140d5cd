"""Independent reference computations used by the tests."""
import math

import numpy as np
from scipy.optimize import linprog


def sample_triangle(tri, n, seed=1):
    rng = np.random.default_rng(seed)
    u, v = rng.random(n), rng.random(n)
    flip = u + v > 1
    u[flip], v[flip] = 1 - u[flip], 1 - v[flip]
    p = tri.points
    x = p[0, 0] + u * (p[1, 0] - p[0, 0]) + v * (p[2, 0] - p[0, 0])
    y = p[0, 1] + u * (p[1, 1] - p[0, 1]) + v * (p[2, 1] - p[0, 1])
    return x, y


def monomials(x, y, m):
    return np.stack([x ** (i - j) * y**j for i in range(m) for j in range(i + 1)], axis=1)


def mc_l2_error(f, tri, m, n=400_000, seed=1):
    """Monte Carlo least squares: sqrt(|T| * mean residual^2)."""
    x, y = sample_triangle(tri, n, seed)
    V = monomials(x, y, m)
    vals = f(x, y)
    c, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return math.sqrt(np.mean((vals - V @ c) ** 2) * tri.area)


def sampled_minimax(f, tri, m, n=4000, seed=2):
    """Best uniform fit over random points plus the vertices (LP)."""
    x, y = sample_triangle(tri, n, seed)
    p = tri.points
    t = np.linspace(0, 1, 400)[:, None]
    edges = np.concatenate([p[i] + t * (p[(i + 1) % 3] - p[i]) for i in range(3)])
    x, y = np.concatenate([x, edges[:, 0]]), np.concatenate([y, edges[:, 1]])
    c0 = p.mean(axis=0)
    V = monomials(x - c0[0], y - c0[1], m)
    vals = f(x, y)
    k = V.shape[1]
    one = np.ones((len(x), 1))
    A = np.block([[V, -one], [-V, -one]])
    b = np.concatenate([vals, -vals])
    cost = np.zeros(k + 1)
    cost[-1] = 1
    res = linprog(cost, A_ub=A, b_ub=b, bounds=[(None, None)] * k + [(0, None)], method="highs")
    return float(res.x[-1])


def circumradius(tri):
    a, b, c = tri.edge_lengths()
    return a * b * c / (4 * tri.area)
