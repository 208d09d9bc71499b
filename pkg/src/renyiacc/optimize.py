"""Derivative-free optimization helpers: golden section, Nelder-Mead simplex
descent, and certified concave maximization over probability simplices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-12,
                       max_iter: int = 200):
    """Maximum of a unimodal function on [lo, hi]; returns (x, f(x))."""
    a, b = float(lo), float(hi)
    c = b - _PHI * (b - a)
    d = a + _PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def nelder_mead(f, x0, scale: float = 0.25, tol: float = 1e-10,
                max_iter: int = 2000):
    """Plain Nelder-Mead minimization; returns (x_best, f_best, evals)."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    pts = [x0.copy()]
    for i in range(n):
        p = x0.copy()
        p[i] += scale if p[i] == 0.0 else scale * max(abs(p[i]), 1.0)
        pts.append(p)
    vals = [f(p) for p in pts]
    evals = n + 1
    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    for _ in range(max_iter):
        order = np.argsort(vals)
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        if abs(vals[-1] - vals[0]) < tol * (abs(vals[0]) + tol):
            break
        centroid = np.mean(pts[:-1], axis=0)
        refl = centroid + alpha * (centroid - pts[-1])
        f_refl = f(refl)
        evals += 1
        if vals[0] <= f_refl < vals[-2]:
            pts[-1], vals[-1] = refl, f_refl
            continue
        if f_refl < vals[0]:
            expd = centroid + gamma * (refl - centroid)
            f_exp = f(expd)
            evals += 1
            if f_exp < f_refl:
                pts[-1], vals[-1] = expd, f_exp
            else:
                pts[-1], vals[-1] = refl, f_refl
            continue
        contr = centroid + rho * (pts[-1] - centroid)
        f_con = f(contr)
        evals += 1
        if f_con < vals[-1]:
            pts[-1], vals[-1] = contr, f_con
            continue
        for i in range(1, n + 1):
            pts[i] = pts[0] + sigma * (pts[i] - pts[0])
            vals[i] = f(pts[i])
        evals += n
    best = int(np.argmin(vals))
    return pts[best], vals[best], evals


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the k-coordinate simplex with denominator = resolution."""
    if k == 1:
        return np.ones((1, 1))
    pts = []

    def rec(prefix, left):
        if len(prefix) == k - 1:
            pts.append(prefix + [left])
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i)

    rec([], resolution)
    return np.asarray(pts, dtype=float) / resolution


@dataclass(frozen=True)
class SimplexMax:
    value: float
    point: np.ndarray
    certificate: float  # last refinement improvement (halving delta)


def concave_simplex_max(f, k: int, coarse: int = 48, tol: float = 1e-10,
                        max_rounds: int = 80) -> SimplexMax:
    """Maximize a concave function over the probability simplex in k coordinates.

    One coordinate reduces to a point, two to golden-section search, more to a
    coarse grid followed by shrinking star-shaped refinements
    ``(1 - r) q + r v`` around the running best. The reported certificate is
    the improvement observed on the last refinement halving; for a smooth
    concave objective successive halvings converge, so a tiny certificate
    pins the maximum.
    """
    if k == 1:
        q = np.ones(1)
        return SimplexMax(f(q), q, 0.0)
    if k == 2:
        x, val = golden_section_max(lambda t: f(np.array([t, 1.0 - t])),
                                    0.0, 1.0, tol=1e-13)
        return SimplexMax(val, np.array([x, 1.0 - x]), 0.0)
    grid = simplex_grid(k, coarse)
    vals = np.array([f(q) for q in grid])
    best_i = int(np.argmax(vals))
    best_q, best_v = grid[best_i].copy(), float(vals[best_i])
    radius = 2.0 / coarse
    local = simplex_grid(k, 8)
    delta = math.inf
    for _ in range(max_rounds):
        improved = False
        round_delta = 0.0
        for v in local:
            q = (1.0 - radius) * best_q + radius * v
            val = f(q)
            if val > best_v:
                round_delta = max(round_delta, val - best_v)
                best_v, best_q = val, q
                improved = True
        delta = round_delta
        if not improved:
            radius *= 0.5
            if radius < 1e-12:
                break
        if improved and round_delta < tol and radius < 1e-6:
            break
    return SimplexMax(best_v, best_q, delta)


def convex_simplex_min(f, k: int, coarse: int = 24, tol: float = 1e-10,
                       max_rounds: int = 80) -> SimplexMax:
    """Minimize a convex function over the simplex (negated concave max)."""
    res = concave_simplex_max(lambda q: -f(q), k, coarse=coarse, tol=tol,
                              max_rounds=max_rounds)
    return SimplexMax(-res.value, res.point, res.certificate)
