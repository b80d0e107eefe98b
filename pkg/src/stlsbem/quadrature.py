"""Composite Gauss-Legendre quadrature on batches of intervals.

Intervals are cut at breakpoints (kinks or jumps of the integrand).  Cells
whose left endpoint is an integrable singularity of algebraic type
(t - a)^(-p), p < 1, are mapped by t = a + h u^4, which turns the
singular factors met here into polynomials in u.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_unit(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (0, 1)."""
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def split_cells(lo, hi, cuts=(), tol=1e-12):
    """Cut intervals [lo_i, hi_i] at the given points.

    Returns (a, b, parent) for the resulting cells.
    """
    a = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
    b = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
    parent = np.arange(a.size)
    for p in sorted(set(float(c) for c in cuts)):
        hit = (a < p - tol) & (b > p + tol)
        if not hit.any():
            continue
        a = np.concatenate([a, np.full(hit.sum(), p)])
        b_new = b[hit].copy()
        b[hit] = p
        b = np.concatenate([b, b_new])
        parent = np.concatenate([parent, parent[hit]])
    order = np.lexsort((a, parent))
    return a[order], b[order], parent[order]


def cell_nodes(a, b, order: int, singular=(), tol=1e-12):
    """Quadrature nodes and weights for each cell, shape (ncells, order)."""
    x, w = gauss_unit(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    h = b - a
    t = a[:, None] + h[:, None] * x[None, :]
    wt = h[:, None] * w[None, :]
    if len(singular):
        sing = np.zeros(a.shape, dtype=bool)
        for s in singular:
            sing |= np.abs(a - s) <= tol
        if sing.any():
            u4 = x ** 4
            t[sing] = a[sing, None] + h[sing, None] * u4[None, :]
            wt[sing] = h[sing, None] * (4.0 * x ** 3 * w)[None, :]
    return t, wt


def integrate_intervals(f, lo, hi, order=8, breaks=(), singular=(), weight=None, tol=1e-12):
    """Integrals of f (times an optional weight function) over [lo_i, hi_i].

    ``f`` and ``weight`` are vectorized callables.  Empty or reversed
    intervals contribute zero.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    out = np.zeros(lo.size)
    keep = hi > lo
    if not keep.any():
        return out
    idx = np.flatnonzero(keep)
    a, b, parent = split_cells(lo[idx], hi[idx], tuple(breaks) + tuple(singular), tol)
    t, wt = cell_nodes(a, b, order, singular, tol)
    vals = f(t)
    if weight is not None:
        vals = vals * weight(t)
    np.add.at(out, idx[parent], np.sum(vals * wt, axis=1))
    return out
