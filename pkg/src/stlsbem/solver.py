"""Schur complement solve of the mixed system and discrete inf-sup constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import GalerkinSystem
from .kernel_ops import PiecewiseConstant
from .mesh import NestedPair

PIVOT_RTOL = 1e-14


class SingularSystemError(RuntimeError):
    """The Schur complement is not numerically positive definite."""

    def __init__(self, formulation: str, m: int, detail: str = ""):
        msg = f"singular Schur complement for the {formulation} formulation with m={m}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.formulation = formulation
        self.m = m


@dataclass(frozen=True, eq=False)
class MixedSolution:
    w: PiecewiseConstant  # primal density on the coarse mesh
    p: PiecewiseConstant  # dual residual on the fine mesh
    formulation: str
    pair: NestedPair


@dataclass(frozen=True)
class InfSupReport:
    gamma_discrete: float
    gamma_theory: float
    c_tilde: float
    n: int
    m: int


def c_S(n: int) -> float:
    """Ellipticity constant sin^2(pi / (2(n+1))) of the energetic formulation."""
    return math.sin(math.pi / (2 * (n + 1))) ** 2


def c_tilde_S(n: int) -> float:
    """Continuous inf-sup constant sin(pi / (2(2n+1))) of V in [H^1_{,0}]' x L2."""
    return math.sin(math.pi / (2 * (2 * n + 1)))


def gamma_theory(n: int, m: int) -> float:
    """Discrete stability bound 2 sin(pi / (2(2n+1))) (1/2 - 1/m); may be <= 0 for m <= 2."""
    return 2.0 * c_tilde_S(n) * (0.5 - 1.0 / m)


def schur_matrix(sys: GalerkinSystem) -> np.ndarray:
    B = sys.V / np.sqrt(sys.D)[:, None]
    return B.T @ B


def _cholesky(S: np.ndarray, formulation: str, m: int):
    """Cholesky factor of the Jacobi-scaled Schur complement and the scaling.

    Scaling by the diagonal makes the pivot test independent of the
    element sizes, which on graded meshes span many orders of magnitude.
    """
    d = np.diag(S).copy()
    if d.size == 0 or not np.all(d > 0):
        raise SingularSystemError(formulation, m, "zero column in the operator matrix")
    d = np.sqrt(d)
    try:
        C = scipy.linalg.cholesky(S / np.outer(d, d), lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(formulation, m, str(exc)) from exc
    piv = np.diag(C) ** 2
    if np.min(piv) < PIVOT_RTOL:
        raise SingularSystemError(formulation, m,
                                  f"smallest scaled pivot {np.min(piv):.3e} below {PIVOT_RTOL:g}")
    return C, d


def solve_mixed(sys: GalerkinSystem) -> MixedSolution:
    """Eliminate p = D^{-1}(g - V w) and solve V^T D^{-1} V w = V^T D^{-1} g."""
    m = sys.pair.m
    S = schur_matrix(sys)
    C, d = _cholesky(S, sys.formulation, m)
    w = scipy.linalg.cho_solve((C, True), (sys.V.T @ (sys.rhs / sys.D)) / d) / d
    p = (sys.rhs - sys.V @ w) / sys.D
    return MixedSolution(
        PiecewiseConstant.from_vector(sys.pair.coarse, w),
        PiecewiseConstant.from_vector(sys.pair.fine, p),
        sys.formulation, sys.pair)


def schur_quadratic_form(sys: GalerkinSystem, w) -> float:
    """(S_h w, w) = ||Q_h V w_H||^2_{L2}."""
    w = np.asarray(w, dtype=float)
    if w.shape != (sys.V.shape[1],):
        raise ValueError(f"expected a coarse vector of length {sys.V.shape[1]}, got shape {w.shape}")
    r = (sys.V @ w) / np.sqrt(sys.D)
    return float(r @ r)


def discrete_inf_sup(sys: GalerkinSystem, M: np.ndarray) -> InfSupReport:
    """Square root of the smallest eigenvalue of S_h x = lambda M x.

    ``M`` is the Gram matrix of the trial space norm: the dual mass matrix
    for the [H^1_{,0}]' setting, the coarse L2 mass for the energetic one.
    """
    M = np.asarray(M, dtype=float)
    nc = sys.V.shape[1]
    if M.ndim == 1:
        M = np.diag(M)
    if M.shape != (nc, nc):
        raise ValueError(f"trial Gram matrix has shape {M.shape}, expected ({nc}, {nc})")
    if not np.allclose(M, M.T, rtol=1e-12, atol=0.0):
        raise ValueError("trial Gram matrix is not symmetric")
    try:
        R = scipy.linalg.cholesky(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError("trial Gram matrix is not positive definite") from exc
    # R^{-1} S R^{-T} has the same spectrum as the pencil (S, M)
    B = scipy.linalg.solve_triangular(R, (sys.V / np.sqrt(sys.D)[:, None]).T, lower=True)
    lam = scipy.linalg.eigvalsh(B @ B.T)
    n = sys.pair.coarse.slice_count
    m = sys.pair.m
    return InfSupReport(
        gamma_discrete=float(math.sqrt(max(lam[0], 0.0))),
        gamma_theory=gamma_theory(n, m),
        c_tilde=c_tilde_S(n),
        n=n,
        m=m,
    )
