"""Galerkin matrices and load vectors of the mixed boundary element method.

Trial functions live on the coarse mesh, test functions on the fine mesh
of a nested pair.  All operator entries are computed in closed form: the
image of a piecewise constant basis function under V is a clamped linear
ramp, so its integrals over fine elements are polynomials in the element
end points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .kernel_ops import SideFunction, mht_frequencies
from .mesh import SIDE0, SIDEL, LateralMesh, NestedPair
from .quadrature import cell_nodes, split_cells

STANDARD = "standard"
ENERGETIC = "energetic"
MHT = "mht"
DIRECT = "direct"
FORMULATIONS = (STANDARD, ENERGETIC, MHT, DIRECT)

_ALIASES = {"direct-energetic": DIRECT, "direct_energetic": DIRECT, "ebem": ENERGETIC}

DEFAULT_MHT_MODES = 256


def normalize_formulation(name: str) -> str:
    key = _ALIASES.get(str(name).lower(), str(name).lower())
    if key not in FORMULATIONS:
        raise ValueError(f"unknown formulation {name!r}; choose from {FORMULATIONS}")
    return key


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    """Blocks of the saddle point system [[D, V], [V^T, 0]] [p; w] = [rhs; 0].

    ``D`` holds the diagonal of the fine L2 mass matrix.
    """

    D: np.ndarray
    V: np.ndarray
    rhs: np.ndarray
    formulation: str
    pair: NestedPair

    def __post_init__(self):
        nf, nc = self.pair.fine.dofs, self.pair.coarse.dofs
        if self.D.shape != (nf,) or self.V.shape != (nf, nc) or self.rhs.shape != (nf,):
            raise ValueError(
                f"inconsistent block shapes D{self.D.shape} V{self.V.shape} rhs{self.rhs.shape} "
                f"for {nf} fine and {nc} coarse DoFs")


def assemble_mass_L2(mesh: LateralMesh) -> np.ndarray:
    """Diagonal of the L2 mass matrix of piecewise constants: the element lengths."""
    return mesh.lengths()


def _shift_matrix(pair: NestedPair) -> np.ndarray:
    fs, _, _ = pair.fine.element_arrays()
    cs, _, _ = pair.coarse.element_arrays()
    return np.where(fs[:, None] == cs[None, :], 0.0, pair.coarse.L)


def _ramp_antiderivative(x, a, b):
    """Antiderivative vanishing left of a of the ramp clamp(x - a, 0, b - a)."""
    y = np.clip(x - a, 0.0, b - a)
    return 0.5 * y * y + (b - a) * np.maximum(x - b, 0.0)


def assemble_V(pair: NestedPair, couple: bool = True) -> np.ndarray:
    """Entries int_{fine j} (V phi_l)(t) dt.

    With ``couple=False`` the L-delayed coupling between opposite sides is
    dropped, which gives the block diagonal part V_D of the operator.
    """
    _, c, d = pair.fine.element_arrays()
    _, a, b = pair.coarse.element_arrays()
    shift = _shift_matrix(pair)
    a, b = a[None, :], b[None, :]
    Vm = 0.5 * (_ramp_antiderivative(d[:, None] - shift, a, b)
                - _ramp_antiderivative(c[:, None] - shift, a, b))
    if not couple:
        Vm[shift > 0] = 0.0
    return Vm


def assemble_dtV(pair: NestedPair, couple: bool = True) -> np.ndarray:
    """Entries int_{fine j} (d/dt V phi_l)(t) dt: half the overlap lengths."""
    _, c, d = pair.fine.element_arrays()
    _, a, b = pair.coarse.element_arrays()
    shift = _shift_matrix(pair)
    lo = np.maximum(c[:, None], a[None, :] + shift)
    hi = np.minimum(d[:, None], b[None, :] + shift)
    Vm = 0.5 * np.maximum(hi - lo, 0.0)
    if not couple:
        Vm[shift > 0] = 0.0
    return Vm


def default_mht_modes(pair: NestedPair) -> int:
    """Truncation that resolves the fine mesh: at least 256 and 8x the fine elements per side."""
    return max(DEFAULT_MHT_MODES, 8 * max(pair.fine.n_elements))


def _mht_V_truncated(pair: NestedPair, K: int, block: int = 1024) -> np.ndarray:
    T = pair.coarse.T
    L = pair.coarse.L
    fine, coarse = pair.fine, pair.coarse
    Vm = np.zeros((fine.dofs, coarse.dofs))
    alpha_all = mht_frequencies(K, T)
    for k0 in range(0, K, block):
        alpha = alpha_all[k0:k0 + block]
        for sf, ftm in enumerate(fine.sides):
            rows = slice(fine.offset(sf), fine.offset(sf) + ftm.n_elements)
            test = (np.sin(np.outer(ftm.right, alpha)) - np.sin(np.outer(ftm.left, alpha))) / alpha ** 3 / T
            for sc, ctm in enumerate(coarse.sides):
                cols = slice(coarse.offset(sc), coarse.offset(sc) + ctm.n_elements)
                shift = 0.0 if sf == sc else L
                lo = np.minimum(ctm.left + shift, T)
                hi = np.minimum(ctm.right + shift, T)
                trial = np.sin(np.outer(alpha, hi)) - np.sin(np.outer(alpha, lo))
                Vm[rows, cols] += test @ trial
    return Vm


def assemble_MHT_V(pair: NestedPair, K: Optional[int] = None, check: bool = True) -> np.ndarray:
    """Entries <H_T V phi_l, phi_j> from a K-mode sine/cosine expansion.

    The sine coefficients of the ramp V phi_l and the cosine integrals over
    fine elements are both closed form.  With ``check`` the result is
    compared with the 2K-mode matrix and a warning is issued if they differ
    by more than 1e-4 in relative Frobenius norm.
    """
    if K is None:
        K = default_mht_modes(pair)
    if int(K) != K or K < 1:
        raise ValueError(f"MHT truncation K must be a positive integer, got {K!r}")
    K = int(K)
    Vm = _mht_V_truncated(pair, K)
    if check:
        V2 = _mht_V_truncated(pair, 2 * K)
        scale = np.linalg.norm(V2)
        if scale > 0 and np.linalg.norm(V2 - Vm) > 1e-4 * scale:
            warnings.warn(f"MHT matrix not converged at K={K} modes "
                          f"(relative change {np.linalg.norm(V2 - Vm) / scale:.2e} at 2K)",
                          RuntimeWarning, stacklevel=2)
    return Vm


@lru_cache(maxsize=64)
def sine_coefficients(g: SideFunction, side: int, K: int, T: float, order: int = 8) -> np.ndarray:
    """f_k = 2/T int_0^T g_side(t) sin(alpha_k t) dt for k < K, by composite Gauss quadrature."""
    ncells = max(64, K)
    edges = np.linspace(0.0, T, ncells + 1)
    a, b, _ = split_cells(edges[:-1], edges[1:], g.breaks[side] + g.singular[side])
    t, wt = cell_nodes(a, b, order, g.singular[side])
    t, wt = t.ravel(), wt.ravel()
    gw = g.value(side, t) * wt
    alpha = mht_frequencies(K, T)
    out = np.empty(K)
    for k0 in range(0, K, 512):
        out[k0:k0 + 512] = np.sin(np.outer(alpha[k0:k0 + 512], t)) @ gw
    out *= 2.0 / T
    out.flags.writeable = False
    return out


def assemble_rhs(fine: LateralMesh, g: SideFunction, formulation: str,
                 quad_order: int = 8, mht_modes: Optional[int] = None) -> np.ndarray:
    """Load vector tested with the fine piecewise constants."""
    formulation = normalize_formulation(formulation)
    if formulation in (ENERGETIC, DIRECT) and not g.has_derivative:
        raise ValueError(f"the {formulation} formulation needs the time derivative of the data")
    T, L = fine.T, fine.L
    parts = []
    for s, tm in enumerate(fine.sides):
        c, d = tm.left, tm.right
        if formulation == STANDARD:
            parts.append(g.integrate(s, c, d, quad_order))
        elif formulation == ENERGETIC:
            parts.append(g.integrate_derivative(s, c, d, quad_order))
        elif formulation == DIRECT:
            own = g.integrate_derivative(s, c, d, quad_order)
            # d/dt (K g)_s(t) = -1/2 d/dt g_{other}(t - L)
            other = g.integrate_derivative(1 - s, c - L, d - L, quad_order)
            parts.append(0.5 * own - 0.5 * other)
        else:
            K = mht_modes or max(DEFAULT_MHT_MODES, 8 * max(fine.n_elements))
            gk = sine_coefficients(g, s, int(K), float(T), quad_order)
            alpha = mht_frequencies(int(K), T)
            cos_int = (np.sin(np.outer(d, alpha)) - np.sin(np.outer(c, alpha))) / alpha
            parts.append(cos_int @ gk)
    return np.concatenate(parts)


def assemble_dual_mass(mesh: LateralMesh) -> np.ndarray:
    """Gram matrix of the coarse piecewise constants in the [H^1_{,0}]' inner product.

    Per side, M[k, l] = int int G(t, s) phi_k(s) phi_l(t) ds dt with the
    Green's function G(t, s) = T - max(t, s); the sides decouple.
    """
    T = mesh.T
    blocks = []
    for tm in mesh.sides:
        a, h, mid = tm.left, tm.lengths, tm.midpoints
        n = h.size
        later = np.maximum.outer(np.arange(n), np.arange(n))
        M = np.outer(h, h) * (T - mid[later])
        M[np.diag_indices(n)] = h * h * (T - a - 2.0 * h / 3.0)
        blocks.append(M)
    n0, nL = mesh.n_elements
    out = np.zeros((n0 + nL, n0 + nL))
    out[:n0, :n0] = blocks[SIDE0]
    out[n0:, n0:] = blocks[SIDEL]
    return out


def assemble_operator(pair: NestedPair, formulation: str, mht_modes: Optional[int] = None,
                      couple: bool = True) -> np.ndarray:
    formulation = normalize_formulation(formulation)
    if formulation == STANDARD:
        return assemble_V(pair, couple)
    if formulation in (ENERGETIC, DIRECT):
        return assemble_dtV(pair, couple)
    return assemble_MHT_V(pair, mht_modes)


def build_system(pair: NestedPair, g: SideFunction, formulation: str, quad_order: int = 8,
                 mht_modes: Optional[int] = None) -> GalerkinSystem:
    formulation = normalize_formulation(formulation)
    if formulation == MHT and mht_modes is None:
        mht_modes = default_mht_modes(pair)
    Vm = assemble_operator(pair, formulation, mht_modes)
    rhs = assemble_rhs(pair.fine, g, formulation, quad_order, mht_modes)
    return GalerkinSystem(assemble_mass_L2(pair.fine), Vm, rhs, formulation, pair)


def dump_matrix(path, A) -> None:
    """Row-major plain-text dump with full double precision."""
    np.savetxt(path, np.atleast_2d(A), fmt="%.17g")
