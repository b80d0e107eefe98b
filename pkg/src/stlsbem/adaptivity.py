"""Indicator-driven adaptive refinement of the coarse mesh."""

from __future__ import annotations

import contextlib
import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .assembly import build_system, normalize_formulation
from .kernel_ops import SideFunction
from .mesh import (LateralMesh, enforce_shift_constraint, refine_marked,
                   subdivide)
from .norms import DensityError, dual_norm_green, l2_error, l2_norm, local_indicator
from .solver import SingularSystemError, solve_mixed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdaptiveConfig:
    theta: float = 0.5
    max_iters: int = 15
    m: int = 3
    constrained: bool = True
    formulation: str = "standard"
    dofs_cap: int = 20_000
    quad_order: int = 8
    mht_modes: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta!r}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters!r}")
        object.__setattr__(self, "formulation", normalize_formulation(self.formulation))


@dataclass
class ConvergenceRecord:
    level: int
    dofs_coarse: int
    dofs_fine: int
    indicator: float
    error_dual: float = math.nan
    error_l2: float = math.nan
    failed: bool = False
    mesh: Optional[LateralMesh] = field(default=None, repr=False, compare=False)


@dataclass
class AdaptiveTrace:
    records: list[ConvergenceRecord]
    constrained: bool
    failed: bool = False
    message: str = ""

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def dorfler_mark(eta: np.ndarray, theta: float) -> np.ndarray:
    """Global indices of the smallest set carrying theta of sum(eta^2).

    Elements are taken by decreasing eta^2; ties go to side 0 before side L
    and then to the earlier element, i.e. to the smaller global index.
    """
    eta2 = np.asarray(eta, dtype=float) ** 2
    total = eta2.sum()
    if total <= 0:
        return np.zeros(0, dtype=int)
    order = np.lexsort((np.arange(eta2.size), -eta2))
    cum = np.cumsum(eta2[order])
    count = int(np.argmax(cum >= theta * total)) + 1
    return np.sort(order[:count])


def _to_side_index(mesh: LateralMesh, idx: np.ndarray):
    n0 = mesh.side0.n_elements
    return [(0, int(i)) if i < n0 else (1, int(i - n0)) for i in idx]


def evaluate(mesh: LateralMesh, g: SideFunction, exact: Optional[SideFunction], m: int,
             formulation: str, quad_order: int = 8, mht_modes: Optional[int] = None, level: int = 0):
    """Solve on one coarse mesh; return (record, solution, per-element indicator)."""
    pair = subdivide(mesh, m)
    sys = build_system(pair, g, formulation, quad_order, mht_modes)
    sol = solve_mixed(sys)
    eta = local_indicator(sol.p, mesh)
    rec = ConvergenceRecord(level, mesh.dofs, pair.fine.dofs, l2_norm(sol.p), mesh=mesh)
    if exact is not None:
        err = DensityError(exact, sol.w)
        rec.error_dual = dual_norm_green(err)
        rec.error_l2 = l2_error(err)
    return rec, sol, eta


def adapt(g: SideFunction, exact: Optional[SideFunction], initial: LateralMesh,
          cfg: AdaptiveConfig) -> AdaptiveTrace:
    """Solve-estimate-mark-refine loop with optional shift-constraint closure."""
    mesh = enforce_shift_constraint(initial) if cfg.constrained else initial
    if cfg.constrained and not mesh == initial:
        log.warning("initial mesh violated the shift constraint; closed it before the first solve")
    trace = AdaptiveTrace([], cfg.constrained)
    for it in range(cfg.max_iters):
        try:
            rec, _, eta = evaluate(mesh, g, exact, cfg.m, cfg.formulation,
                                   cfg.quad_order, cfg.mht_modes, level=it)
        except SingularSystemError as exc:
            trace.failed = True
            trace.message = f"iteration {it}: {exc}"
            log.warning(trace.message)
            break
        trace.records.append(rec)
        log.info("iter %d: dofs=%d indicator=%.3e error=%.3e",
                 it, rec.dofs_coarse, rec.indicator, rec.error_dual)
        if it == cfg.max_iters - 1:
            break
        marked = dorfler_mark(eta, cfg.theta)
        if marked.size == 0:
            trace.message = "indicator vanished"
            break
        mesh = refine_marked(mesh, _to_side_index(mesh, marked))
        if cfg.constrained:
            mesh = enforce_shift_constraint(mesh)
        if mesh.dofs > cfg.dofs_cap:
            trace.message = f"coarse DoF cap {cfg.dofs_cap} exceeded"
            break
    return trace


def fit_rate(dofs: Sequence[float], values: Sequence[float]) -> float:
    """Negated least-squares slope of log(values) against log(dofs)."""
    x = np.asarray(dofs, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size != y.size:
        raise ValueError("dofs and values differ in length")
    if x.size < 3:
        raise ValueError(f"at least 3 points are needed to fit a rate, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("rates need positive, finite values")
    slope = np.polyfit(np.log(x), np.log(y), 1)[0]
    return float(-slope)


@contextlib.contextmanager
def open_sink(target):
    """Yield ``target`` if it is a text stream, else open it as a file for writing."""
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh


def write_trace_csv(trace: AdaptiveTrace, target) -> None:
    with open_sink(target) as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["iter", "dofs_coarse", "dofs_fine", "indicator", "error_dual", "error_l2",
                     "constrained_flag"])
        for r in trace.records:
            wr.writerow([r.level, r.dofs_coarse, r.dofs_fine, repr(r.indicator),
                         repr(r.error_dual), repr(r.error_l2), int(trace.constrained)])
