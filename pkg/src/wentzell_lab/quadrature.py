"""Quadrature rules on reference simplices.

Interval rules are Gauss-Legendre on [0, 1]. Triangle rules are collapsed
(Duffy) Gauss products on the reference triangle {x, y >= 0, x + y <= 1},
which gives a rule of any requested polynomial degree with positive weights.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def interval_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points/weights on [0, 1], exact up to ``degree``."""
    npts = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(npts)
    pts = 0.5 * (x + 1.0)
    wts = 0.5 * w
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on the reference triangle, exact up to ``degree``.

    Returns barycentric-free reference coordinates ``(npts, 2)`` and weights
    summing to 1/2 (the reference area).
    """
    # x = u, y = v (1 - u); the Jacobian (1 - u) raises the degree in u by one
    nu = max(1, (degree + 3) // 2)
    nv = max(1, (degree + 2) // 2)
    u, wu = interval_rule(2 * nu - 1)
    v, wv = interval_rule(2 * nv - 1)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv) * (1.0 - uu)
    pts = np.column_stack([uu.ravel(), (vv * (1.0 - uu)).ravel()])
    wts = ww.ravel()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def p1_shape_interval(s: np.ndarray) -> np.ndarray:
    """P1 shape functions on [0, 1] evaluated at ``s``; shape ``(len(s), 2)``."""
    s = np.asarray(s, dtype=float)
    return np.column_stack([1.0 - s, s])


def p1_shape_triangle(pts: np.ndarray) -> np.ndarray:
    """P1 shape functions on the reference triangle; shape ``(npts, 3)``."""
    pts = np.asarray(pts, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return np.column_stack([1.0 - x - y, x, y])
