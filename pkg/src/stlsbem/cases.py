"""Benchmark Dirichlet data on (0, 3) x (0, 6).

Each datum is a wave entering at x=0 and arriving at x=L one time unit
L later, g(L, t) = g(0, t - L).  The single layer density
w = (2 d/dt g(0, .), 0) reproduces both traces, and its running integral
is simply 2 g(0, .).  For the direct formulation the density is the
Neumann trace of u(x, t) = g(0, t - x), i.e. (g_0', -g_0'(. - L)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel_ops import SideFunction

L_DEFAULT = 3.0
T_DEFAULT = 6.0


def _g1(t):
    t = np.asarray(t, dtype=float)
    on = (t >= 0) & (t <= 2)
    return np.where(on, 0.5 * (t - 2) ** 3 * (-t) ** 3, 0.0)


def _dg1(t):
    t = np.asarray(t, dtype=float)
    on = (t >= 0) & (t <= 2)
    return np.where(on, 3.0 * t ** 2 * (t - 2) ** 2 * (1 - t), 0.0)


def _g2(t):
    t = np.asarray(t, dtype=float)
    return np.where(t >= 0, 0.5 * np.abs(np.sin(-np.pi * t)), 0.0)


def _dg2(t):
    t = np.asarray(t, dtype=float)
    val = 0.5 * np.pi * np.cos(np.pi * t) * np.sign(np.sin(np.pi * t))
    return np.where(t >= 0, val, 0.0)


def _g3(t):
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, np.abs(t) ** 0.25, 0.0)


def _dg3(t):
    t = np.asarray(t, dtype=float)
    pos = t > 0
    return np.where(pos, 0.25 * np.where(pos, t, 1.0) ** -0.75, 0.0)


def _shifted(f, L):
    return lambda t: f(np.asarray(t, dtype=float) - L)


def _scaled(f, a):
    return lambda t: a * f(t)


def _zero(t):
    return np.zeros(np.shape(t))


@dataclass(frozen=True)
class BenchmarkCase:
    id: str
    L: float
    T: float
    g: SideFunction
    density: SideFunction         # exact single layer density
    direct_density: SideFunction  # exact Neumann trace

    def check_shift_identity(self, t) -> float:
        """max |g(0, t - L) - g(L, t)| over the given times."""
        t = np.asarray(t, dtype=float)
        return float(np.max(np.abs(self.g.value(0, t - self.L) - self.g.value(1, t))))


def _build(case_id, g0, dg0, breaks0, singular0, in_l2, L=L_DEFAULT, T=T_DEFAULT):
    breaks0 = tuple(b for b in breaks0 if 0 < b < T)
    breaksL = tuple(sorted({L} | {b + L for b in breaks0 if b + L < T}))
    singularL = tuple(s + L for s in singular0 if s + L < T)
    g = SideFunction(
        values=(g0, _shifted(g0, L)),
        derivatives=(dg0, _shifted(dg0, L)),
        breaks=(breaks0, breaksL),
        singular=(singular0, singularL),
        name=case_id,
    )
    density = SideFunction(
        values=(_scaled(dg0, 2.0), _zero),
        antiderivatives=(_scaled(g0, 2.0), _zero),
        breaks=(breaks0, ()),
        singular=(singular0, ()),
        square_integrable=in_l2,
        name=f"{case_id} density",
    )
    direct = SideFunction(
        values=(dg0, _scaled(_shifted(dg0, L), -1.0)),
        antiderivatives=(g0, _scaled(_shifted(g0, L), -1.0)),
        breaks=(breaks0, breaksL),
        singular=(singular0, singularL),
        square_integrable=in_l2,
        name=f"{case_id} direct density",
    )
    return BenchmarkCase(case_id, L, T, g, density, direct)


CASES = {
    "g1": _build("g1", _g1, _dg1, (2.0,), (), True),
    "g2": _build("g2", _g2, _dg2, tuple(float(k) for k in range(1, 7)), (), True),
    "g3": _build("g3", _g3, _dg3, (), (0.0,), False),
}


def get_case(case_id: str) -> BenchmarkCase:
    try:
        return CASES[case_id]
    except KeyError:
        raise ValueError(f"unknown case {case_id!r}; choose from {sorted(CASES)}") from None


def eval_case(case_id: str, which: str, side, t):
    """Closed-form data: 'g', 'dtg' or 'exact_density_cumulative'."""
    case = get_case(case_id)
    t = np.asarray(t, dtype=float)
    tol = 1e-10 * max(1.0, case.T)
    if np.any(t < -tol) or np.any(t > case.T + tol):
        raise ValueError(f"time {t!r} outside [0, {case.T}]")
    if which == "g":
        return case.g.value(side, t)
    if which == "dtg":
        return case.g.derivative(side, t)
    if which == "exact_density_cumulative":
        return case.density.cumulative(side, t)
    raise ValueError(f"unknown quantity {which!r}")
