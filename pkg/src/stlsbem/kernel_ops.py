"""Pointwise application of the 1D wave boundary integral operators.

In one space dimension the fundamental solution is H(t - |x|)/2, so the
single layer operator reduces to running integrals of the density with an
L-delayed coupling between the two boundary points:

    (V w)_0(t) = 1/2 int_0^t w_0 + 1/2 int_0^{t-L} w_L
    (V w)_L(t) = 1/2 int_0^{t-L} w_0 + 1/2 int_0^t w_L
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .mesh import SIDE0, SIDEL, LateralMesh, node_tolerance, side_index
from .quadrature import integrate_intervals

Fn = Callable[[np.ndarray], np.ndarray]


class PiecewiseConstant:
    """Density with one coefficient per element on each side."""

    def __init__(self, mesh: LateralMesh, coeffs0, coeffsL):
        c0 = np.array(coeffs0, dtype=float).reshape(-1)
        cL = np.array(coeffsL, dtype=float).reshape(-1)
        if c0.size != mesh.side0.n_elements or cL.size != mesh.sideL.n_elements:
            raise ValueError(
                f"coefficient lengths ({c0.size}, {cL.size}) do not match element counts {mesh.n_elements}")
        self.mesh = mesh
        self.coeffs = (c0, cL)

    @classmethod
    def from_vector(cls, mesh: LateralMesh, vec) -> "PiecewiseConstant":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (mesh.dofs,):
            raise ValueError(f"expected a vector of length {mesh.dofs}, got shape {vec.shape}")
        n0 = mesh.side0.n_elements
        return cls(mesh, vec[:n0], vec[n0:])

    @classmethod
    def zeros(cls, mesh: LateralMesh) -> "PiecewiseConstant":
        return cls.from_vector(mesh, np.zeros(mesh.dofs))

    @property
    def coeffs0(self) -> np.ndarray:
        return self.coeffs[SIDE0]

    @property
    def coeffsL(self) -> np.ndarray:
        return self.coeffs[SIDEL]

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(self.coeffs)

    def value(self, side, t):
        """Right-continuous point values; zero for t < 0."""
        s = side_index(side)
        tm = self.mesh.sides[s]
        t = np.asarray(t, dtype=float)
        out = self.coeffs[s][tm.locate(t)]
        return np.where(t < 0, 0.0, out)

    def cumulative(self, side, t):
        """int_0^t w_side, zero for t <= 0 and constant beyond T."""
        s = side_index(side)
        tm = self.mesh.sides[s]
        c = self.coeffs[s]
        t = np.clip(np.asarray(t, dtype=float), 0.0, tm.T)
        at_nodes = np.concatenate([[0.0], np.cumsum(tm.lengths * c)])
        idx = tm.locate(t)
        return at_nodes[idx] + c[idx] * (t - tm.left[idx])

    def __mul__(self, a: float) -> "PiecewiseConstant":
        return PiecewiseConstant(self.mesh, a * self.coeffs0, a * self.coeffsL)

    __rmul__ = __mul__

    def __repr__(self):
        return f"PiecewiseConstant(dofs={self.mesh.dofs})"


@dataclass(frozen=True)
class SideFunction:
    """A pair of functions of time, one per lateral side.

    ``values``, ``derivatives`` and ``antiderivatives`` are vectorized
    callables defined on [0, T]; every function is taken as zero for t < 0.
    ``breaks`` lists the points per side where a function is not smooth and
    ``singular`` the points where an integrable endpoint singularity starts
    (quadrature cells beginning there are treated by substitution).
    """

    values: tuple[Fn, Fn]
    derivatives: Optional[tuple[Fn, Fn]] = None
    antiderivatives: Optional[tuple[Fn, Fn]] = None
    breaks: tuple[tuple[float, ...], tuple[float, ...]] = ((), ())
    singular: tuple[tuple[float, ...], tuple[float, ...]] = ((), ())
    square_integrable: bool = True
    name: str = field(default="", compare=False)

    @property
    def has_derivative(self) -> bool:
        return self.derivatives is not None

    def _eval(self, fns, side, t):
        s = side_index(side)
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        pos = t >= 0
        if np.any(pos):
            out[pos] = fns[s](t[pos])
        return out

    def value(self, side, t):
        return self._eval(self.values, side, t)

    def derivative(self, side, t):
        if self.derivatives is None:
            raise ValueError(f"no time derivative available for {self.name or 'this function'}")
        return self._eval(self.derivatives, side, t)

    def integrate(self, side, lo, hi, order=8, weight=None):
        """int_lo^hi f_side(t) weight(t) dt for arrays of bounds (clipped below at 0)."""
        s = side_index(side)
        lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
        hi = np.maximum(np.asarray(hi, dtype=float), 0.0)
        return integrate_intervals(self.values[s], lo, hi, order, self.breaks[s],
                                   self.singular[s], weight)

    def integrate_derivative(self, side, lo, hi, order=8, weight=None):
        if self.derivatives is None:
            raise ValueError(f"no time derivative available for {self.name or 'this function'}")
        s = side_index(side)
        lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
        hi = np.maximum(np.asarray(hi, dtype=float), 0.0)
        return integrate_intervals(self.derivatives[s], lo, hi, order, self.breaks[s],
                                   self.singular[s], weight)

    def cumulative(self, side, t, order=16):
        """int_0^t f_side; closed form when an antiderivative is attached."""
        t = np.asarray(t, dtype=float)
        if self.antiderivatives is not None:
            return self._eval(self.antiderivatives, side, t)
        flat = np.maximum(t.reshape(-1), 0.0)
        return self.integrate(side, np.zeros_like(flat), flat, order).reshape(t.shape)


Density = Union[PiecewiseConstant, SideFunction]


def _check_time(t, T):
    t = np.asarray(t, dtype=float)
    tol = node_tolerance(T)
    if np.any(t < -tol) or np.any(t > T + tol):
        raise ValueError(f"time {t!r} outside [0, {T}]")
    return t


def apply_V(w: Density, side, t, T: Optional[float] = None, L: Optional[float] = None):
    """Single layer operator (V w)_side(t)."""
    if isinstance(w, PiecewiseConstant):
        T, L = w.mesh.T, w.mesh.L
    elif T is None or L is None:
        raise ValueError("T and L are required when applying V to a SideFunction")
    s = side_index(side)
    t = _check_time(t, T)
    own = w.cumulative(s, t)
    shifted = t - L
    other = np.where(shifted > 0, w.cumulative(1 - s, np.maximum(shifted, 0.0)), 0.0)
    return 0.5 * own + 0.5 * other


def apply_dtV(w: PiecewiseConstant, side, t):
    """Time derivative of V w, right-continuous at element nodes."""
    s = side_index(side)
    t = _check_time(t, w.mesh.T)
    shifted = t - w.mesh.L
    other = np.where(shifted >= 0, w.value(1 - s, np.maximum(shifted, 0.0)), 0.0)
    return 0.5 * w.value(s, t) + 0.5 * other


def apply_K(g: SideFunction, side, t, L: float):
    """Double layer operator for data vanishing outside the lateral boundary."""
    s = side_index(side)
    t = np.asarray(t, dtype=float)
    return -0.5 * g.value(1 - s, t - L)


def potential_eval(w: Density, x, t, T: Optional[float] = None, L: Optional[float] = None):
    """Single layer potential u(x, t) inside the space-time cylinder."""
    if isinstance(w, PiecewiseConstant):
        T, L = w.mesh.T, w.mesh.L
    elif T is None or L is None:
        raise ValueError("T and L are required for a SideFunction density")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    tol = node_tolerance(max(T, L))
    if np.any(x < -tol) or np.any(x > L + tol) or np.any(t < -tol) or np.any(t > T + tol):
        raise ValueError(f"point (x={x!r}, t={t!r}) outside [0, {L}] x [0, {T}]")
    r0 = t - np.abs(x)
    rL = t - np.abs(x - L)
    u0 = np.where(r0 > 0, w.cumulative(SIDE0, np.maximum(r0, 0.0)), 0.0)
    uL = np.where(rL > 0, w.cumulative(SIDEL, np.maximum(rL, 0.0)), 0.0)
    return 0.5 * u0 + 0.5 * uL


def mht_frequencies(K: int, T: float) -> np.ndarray:
    """alpha_k = (pi/2 + k pi) / T for k = 0..K-1."""
    return (0.5 * np.pi + np.pi * np.arange(K)) / T


def apply_MHT_coeffs(f_sine_coeffs: Sequence[float], t, T: float):
    """Modified Hilbert transform of sum_k f_k sin(alpha_k t), i.e. sum_k f_k cos(alpha_k t)."""
    f = np.asarray(f_sine_coeffs, dtype=float).reshape(-1)
    t = np.asarray(t, dtype=float)
    if f.size == 0:
        return np.zeros(t.shape)
    alpha = mht_frequencies(f.size, T)
    return np.cos(np.multiply.outer(t, alpha)) @ f
