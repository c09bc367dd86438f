"""Quadrature building blocks: double-exponential, Gauss-Legendre panels,
and product sphere rules for S^1 and S^3."""

from __future__ import annotations

from functools import lru_cache
from math import pi
from typing import Callable, Tuple

import numpy as np

from .errors import QuadratureNotConverged


@lru_cache(maxsize=None)
def de_nodes_01(m: int, t_max: float = 5.2) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """tanh-sinh rule on (0, 1): nodes x, stable complements 1-x, weights.

    Integrands with endpoint singularities must be written in terms of the
    returned complement; forming 1-x from x collapses in floating point
    long before the weights decay.
    """
    h = t_max / m
    k = np.arange(-m, m + 1)
    t = k * h
    with np.errstate(over="ignore"):
        u = 0.5 * pi * np.sinh(t)
        x = 1.0 / (1.0 + np.exp(-2.0 * u))
        xc = 1.0 / (1.0 + np.exp(2.0 * u))
        dw = 0.25 * h * pi * np.cosh(t) / np.cosh(u) ** 2
    keep = (x > 1e-300) & (xc > 1e-300) & (dw > 0) & np.isfinite(dw)
    return x[keep], xc[keep], dw[keep]


@lru_cache(maxsize=None)
def _leggauss(m: int):
    return np.polynomial.legendre.leggauss(m)


def gl_panel(a: float, b: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = _leggauss(m)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def radial_panels(r_max: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Geometric panels on (0, r_max] with Gauss-Legendre nodes."""
    edges = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
    edges = [e for e in edges if e < r_max] + [r_max]
    while edges[-2] * 2 < r_max and edges[-1] - edges[-2] > 4.0:
        edges.insert(-1, edges[-2] * 2)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gl_panel(a, b, m)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


@lru_cache(maxsize=None)
def sphere_nodes(n: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on the unit sphere S^(2n-1) in R^(2n), n in {1, 2}.

    n=1: trapezoid on the circle.  n=2: torus coordinates
    (cos(e)e^{i p1}, sin(e)e^{i p2}) with measure cos(e)sin(e) de dp1 dp2.
    """
    if n == 1:
        th = np.arange(m) * (2 * pi / m)
        pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
        w = np.full(m, 2 * pi / m)
        return pts, w
    if n == 2:
        me = max(8, m // 2)
        e, we = gl_panel(0.0, pi / 2, me)
        p = np.arange(m) * (2 * pi / m)
        wp = 2 * pi / m
        ce, se = np.cos(e), np.sin(e)
        pts = []
        ws = []
        for i in range(me):
            for a in range(m):
                for b in range(m):
                    pts.append([ce[i] * np.cos(p[a]), se[i] * np.cos(p[b]),
                                ce[i] * np.sin(p[a]), se[i] * np.sin(p[b])])
                    ws.append(we[i] * ce[i] * se[i] * wp * wp)
        return np.array(pts), np.array(ws)
    raise ValueError("sphere nodes implemented for n <= 2")


def phase_space_integral(fn: Callable[[np.ndarray], np.ndarray], n: int,
                         r_max: float = 14.0, m_sphere: int = 32,
                         m_radial: int = 24) -> complex:
    """Integral over R^(2n) in polar form; fn maps (..., 2n) -> complex."""
    sph, wsph = sphere_nodes(n, m_sphere)
    r, wr = radial_panels(r_max, m_radial)
    pts = r[:, None, None] * sph[None, :, :]
    vals = fn(pts.reshape(-1, 2 * n)).reshape(len(r), len(sph))
    radial_factor = wr * r ** (2 * n - 1)
    return complex(np.einsum("r,s,rs->", radial_factor, wsph, vals))


def adaptive_phase_space_integral(fn, n: int, tol: float = 1e-9,
                                  r_max: float = 14.0) -> Tuple[complex, float]:
    """Refine sphere/radial resolution until two stages agree within tol."""
    prev = None
    for m_sphere, m_radial, rm in ((24, 16, r_max), (40, 24, r_max),
                                   (64, 32, r_max * 1.4), (96, 48, r_max * 1.8)):
        cur = phase_space_integral(fn, n, r_max=rm, m_sphere=m_sphere,
                                   m_radial=m_radial)
        if prev is not None:
            err = abs(cur - prev)
            if err <= tol:
                return cur, err
        prev = cur
    raise QuadratureNotConverged(f"phase-space integral not stable at tol={tol}")
