"""Norms of densities and errors on the lateral boundary.

The dual norm of [H^1_{,0}(0,T)]' is evaluated along two independent
routes.  The Green's function route integrates

    ||e||^2 = int int G(t, s) e(s) e(t) ds dt,   G(t, s) = T - max(t, s),

exactly over pairs of distinct cells (the kernel is separable there) and by
nested quadrature on the diagonal cells.  The spectral route sums the
cosine series (2/T) sum_k alpha_k^{-2} <e, cos(alpha_k .)>^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernel_ops import PiecewiseConstant, SideFunction, mht_frequencies
from .mesh import LateralMesh, is_nested
from .quadrature import cell_nodes, split_cells


@dataclass(frozen=True, eq=False)
class DensityError:
    """The difference exact - approx; either part may be absent (taken as zero)."""

    exact: Optional[SideFunction]
    approx: PiecewiseConstant

    @property
    def mesh(self) -> LateralMesh:
        return self.approx.mesh


def _cells(err: DensityError, side: int):
    tm = err.mesh.sides[side]
    lo, hi = tm.left, tm.right
    cuts, sing = (), ()
    if err.exact is not None:
        sing = err.exact.singular[side]
        cuts = err.exact.breaks[side] + sing
    a, b, _ = split_cells(lo, hi, cuts)
    coeff = err.approx.coeffs[side][tm.locate(0.5 * (a + b))]
    return a, b, coeff, sing


def _exact_values(err: DensityError, side: int, t: np.ndarray) -> np.ndarray:
    if err.exact is None:
        return np.zeros(t.shape)
    return err.exact.value(side, t)


def _green_side(err: DensityError, side: int, order: int) -> float:
    T = err.mesh.T
    a, b, c, sing = _cells(err, side)
    t, wt = cell_nodes(a, b, order, sing)
    e = _exact_values(err, side, t) - c[:, None]
    m0 = np.sum(wt * e, axis=1)
    m1 = np.sum(wt * (T - t) * e, axis=1)
    # running integral of e from the cell start to each outer node
    nc, q = t.shape
    inner_t, inner_w = cell_nodes(np.repeat(a, q), t.ravel(), order, sing)
    inner_e = _exact_values(err, side, inner_t) - np.repeat(c, q)[:, None]
    E = np.sum(inner_w * inner_e, axis=1).reshape(nc, q)
    diag = 2.0 * np.sum(wt * (T - t) * e * E, axis=1)
    # G = T - t for s in an earlier cell and t in a later one
    before = np.concatenate([[0.0], np.cumsum(m0)[:-1]])
    return float(np.sum(diag) + 2.0 * np.sum(m1 * before))


def dual_norm_green(err: DensityError, quad_order: int = 16) -> float:
    """[H^1_{,0}(Sigma)]' norm through the Green's function kernel."""
    if int(quad_order) != quad_order or quad_order < 1:
        raise ValueError(f"quad_order must be a positive integer, got {quad_order!r}")
    total = sum(_green_side(err, s, int(quad_order)) for s in (0, 1))
    return math.sqrt(max(total, 0.0))


def cosine_moments(err: DensityError, side: int, K: int, quad_order: int = 16) -> np.ndarray:
    """<e, cos(alpha_k .)> on one side for k < K."""
    T = err.mesh.T
    alpha = mht_frequencies(K, T)
    tm = err.mesh.sides[side]
    cf = err.approx.coeffs[side]
    out = np.zeros(K)
    block = 2048
    for k0 in range(0, K, block):
        al = alpha[k0:k0 + block]
        prim = np.sin(np.outer(al, tm.nodes))
        out[k0:k0 + block] = -((prim[:, 1:] - prim[:, :-1]) @ cf) / al
    if err.exact is not None:
        ncells = max(64, K)
        edges = np.linspace(0.0, T, ncells + 1)
        sing = err.exact.singular[side]
        a, b, _ = split_cells(edges[:-1], edges[1:], err.exact.breaks[side] + sing)
        t, wt = cell_nodes(a, b, quad_order, sing)
        t, wt = t.ravel(), wt.ravel()
        fw = err.exact.value(side, t) * wt
        for k0 in range(0, K, 256):
            out[k0:k0 + 256] += np.cos(np.outer(alpha[k0:k0 + 256], t)) @ fw
    return out


def dual_norm_spectral(err: DensityError, modes: int = 10_000, quad_order: int = 16) -> float:
    """[H^1_{,0}(Sigma)]' norm from the truncated cosine series."""
    if int(modes) != modes or modes < 1:
        raise ValueError(f"number of modes must be a positive integer, got {modes!r}")
    K = int(modes)
    T = err.mesh.T
    alpha = mht_frequencies(K, T)
    total = 0.0
    for s in (0, 1):
        wk = cosine_moments(err, s, K, quad_order)
        total += (2.0 / T) * np.sum((wk / alpha) ** 2)
    return math.sqrt(total)


def dual_norm(w: PiecewiseConstant) -> float:
    return dual_norm_green(DensityError(None, w))


def l2_norm(p: PiecewiseConstant) -> float:
    return math.sqrt(sum(float(np.sum(tm.lengths * c * c)) for tm, c in zip(p.mesh.sides, p.coeffs)))


def l2_error(err: DensityError, quad_order: int = 16) -> float:
    """||exact - approx||_{L2}; infinite when the exact density is not square integrable."""
    if err.exact is not None and not err.exact.square_integrable:
        return math.inf
    total = 0.0
    for s in (0, 1):
        a, b, c, sing = _cells(err, s)
        t, wt = cell_nodes(a, b, quad_order, sing)
        e = _exact_values(err, s, t) - c[:, None]
        total += float(np.sum(wt * e * e))
    return math.sqrt(total)


def local_indicator(p: PiecewiseConstant, coarse: LateralMesh) -> np.ndarray:
    """Per coarse element eta_l = sqrt(sum over nested fine elements of h_k p_k^2)."""
    if not is_nested(coarse, p.mesh):
        raise ValueError("the fine mesh of p is not nested in the coarse mesh")
    parts = []
    for cm, fm, c in zip(coarse.sides, p.mesh.sides, p.coeffs):
        owner = cm.locate(fm.midpoints)
        parts.append(np.bincount(owner, weights=fm.lengths * c * c, minlength=cm.n_elements))
    return np.sqrt(np.concatenate(parts))
