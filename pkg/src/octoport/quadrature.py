"""Composite Gauss-Legendre rules with refinement by panel doubling."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import NumericalAccuracyError


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def panel_nodes(a: float, b: float, panels: int, order: int = 8):
    """Nodes and weights of the composite rule on ``[a, b]``."""
    x, w = _leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_1d(f, a, b, *, rtol=1e-8, atol=1e-14, order=8, max_width=0.5, max_doublings=8):
    """Integrate a vectorized ``f`` over ``[a, b]``.

    ``f`` maps an array of nodes to values of shape ``(..., nodes)``; the
    integral has shape ``(...)``.  Panels are halved until the largest change
    falls below ``rtol * max|I| + atol``.
    """
    if b <= a:
        return np.zeros_like(np.asarray(f(np.array([a])))[..., 0])
    panels = max(1, math.ceil((b - a) / max_width))
    prev = None
    for _ in range(max_doublings + 1):
        x, w = panel_nodes(a, b, panels, order)
        val = np.asarray(f(x)) @ w
        if prev is not None:
            err = np.max(np.abs(val - prev))
            if err <= rtol * np.max(np.abs(val)) + atol:
                return val
        prev = val
        panels *= 2
    raise NumericalAccuracyError(f"1D quadrature on [{a}, {b}] did not reach rtol={rtol}")


def integrate_2d(f, qa, qb, pa, pb, *, rtol=1e-6, atol=1e-12, order=8, max_cell=0.25, max_halvings=4):
    """Tensor Gauss-Legendre over the rectangle ``[qa, qb] x [pa, pb]``.

    ``f(q, p)`` takes flat arrays of equal length and returns flat values.
    Cells start with side at most ``max_cell`` and are halved until the
    relative change is at most ``rtol``.
    """
    if qb <= qa or pb <= pa:
        return 0.0
    nq = max(1, math.ceil((qb - qa) / max_cell))
    np_ = max(1, math.ceil((pb - pa) / max_cell))
    prev = None
    for _ in range(max_halvings + 1):
        xq, wq = panel_nodes(qa, qb, nq, order)
        xp, wp = panel_nodes(pa, pb, np_, order)
        Q, P = np.meshgrid(xq, xp, indexing="ij")
        vals = np.asarray(f(Q.ravel(), P.ravel())).reshape(Q.shape)
        val = float(wq @ vals @ wp)
        if prev is not None and abs(val - prev) <= rtol * abs(val) + atol:
            return val
        prev = val
        nq *= 2
        np_ *= 2
    raise NumericalAccuracyError(f"2D quadrature on [{qa},{qb}]x[{pa},{pb}] did not reach rtol={rtol}")
