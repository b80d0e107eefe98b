"""Convergence and inf-sup studies on the benchmark data, with CSV output."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adaptivity import AdaptiveConfig, ConvergenceRecord, adapt, evaluate, open_sink
from .assembly import (DIRECT, ENERGETIC, STANDARD, GalerkinSystem, assemble_dual_mass,
                       assemble_mass_L2, assemble_operator, normalize_formulation)
from .cases import get_case
from .mesh import subdivide, uniform_mesh
from .solver import InfSupReport, SingularSystemError, discrete_inf_sup

log = logging.getLogger(__name__)

REFINEMENTS = ("uniform", "adaptive-constrained", "adaptive-nonconstrained")

CONVERGENCE_COLUMNS = ("level", "dofs_coarse", "dofs_fine", "indicator_l2", "error_dual",
                       "error_l2", "rate_running")
INFSUP_COLUMNS = ("n", "gamma_discrete", "gamma_theory", "c_tilde")


@dataclass(frozen=True)
class StudySpec:
    case: str
    formulation: str = STANDARD
    refinement: str = "uniform"
    m: int = 3
    levels: int = 6
    out: Optional[str] = None
    theta: float = 0.5
    base_elements: int = 8
    quad_order: int = 8
    mht_modes: Optional[int] = None

    def __post_init__(self):
        get_case(self.case)
        object.__setattr__(self, "formulation", normalize_formulation(self.formulation))
        if self.refinement not in REFINEMENTS:
            raise ValueError(f"unknown refinement {self.refinement!r}; choose from {REFINEMENTS}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.base_elements < 1:
            raise ValueError(f"base_elements must be >= 1, got {self.base_elements}")
        if self.formulation == STANDARD and self.m < 3:
            warnings.warn(f"standard formulation with m={self.m}: the indicator is not a reliable "
                          "error estimator for m < 3", UserWarning, stacklevel=3)


def _exact_for(case, formulation):
    return case.direct_density if formulation == DIRECT else case.density


def running_rates(dofs, errors) -> list[float]:
    """Rate between consecutive levels; nan in the first row or where undefined."""
    rates = [math.nan]
    for i in range(1, len(dofs)):
        e0, e1 = errors[i - 1], errors[i]
        n0, n1 = dofs[i - 1], dofs[i]
        ok = all(math.isfinite(v) and v > 0 for v in (e0, e1)) and n1 != n0
        rates.append(-math.log(e1 / e0) / math.log(n1 / n0) if ok else math.nan)
    return rates


def run_convergence(spec: StudySpec) -> list[ConvergenceRecord]:
    case = get_case(spec.case)
    exact = _exact_for(case, spec.formulation)
    if spec.refinement == "uniform":
        records = []
        for level in range(spec.levels):
            mesh = uniform_mesh(case.T, spec.base_elements * 2 ** level, L=case.L)
            try:
                rec, _, _ = evaluate(mesh, case.g, exact, spec.m, spec.formulation,
                                     spec.quad_order, spec.mht_modes, level)
            except SingularSystemError as exc:
                log.warning("level %d failed: %s", level, exc)
                rec = ConvergenceRecord(level, mesh.dofs, mesh.dofs * spec.m, math.nan,
                                        failed=True, mesh=mesh)
            records.append(rec)
    else:
        cfg = AdaptiveConfig(theta=spec.theta, max_iters=spec.levels, m=spec.m,
                             constrained=spec.refinement == "adaptive-constrained",
                             formulation=spec.formulation, quad_order=spec.quad_order,
                             mht_modes=spec.mht_modes)
        trace = adapt(case.g, exact, uniform_mesh(case.T, spec.base_elements, L=case.L), cfg)
        records = trace.records
    if spec.out:
        write_convergence_csv(records, spec.out)
    return records


def write_convergence_csv(records, target) -> None:
    """Write a study to a path or an open text stream."""
    dofs = [r.dofs_coarse for r in records]
    rates = running_rates(dofs, [r.error_dual for r in records])
    with open_sink(target) as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CONVERGENCE_COLUMNS)
        for r, rate in zip(records, rates):
            wr.writerow([r.level, r.dofs_coarse, r.dofs_fine, repr(float(r.indicator)),
                         repr(float(r.error_dual)), repr(float(r.error_l2)), repr(float(rate))])


def write_infsup_csv(reports, target) -> None:
    with open_sink(target) as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(INFSUP_COLUMNS)
        for r in reports:
            wr.writerow([r.n, repr(r.gamma_discrete), repr(r.gamma_theory), repr(r.c_tilde)])


def infsup_gram(mesh, formulation: str) -> np.ndarray:
    """Trial norm Gram matrix: coarse L2 mass for the energetic settings, dual mass otherwise."""
    if formulation in (ENERGETIC, DIRECT):
        return assemble_mass_L2(mesh)
    return assemble_dual_mass(mesh)


def run_infsup_study(n_max: int, per_slice_elements: int = 32, formulation: str = ENERGETIC,
                     m: int = 1, L: float = 3.0, out: Optional[str] = None) -> list[InfSupReport]:
    """Discrete inf-sup constants for T = n L, n = 1..n_max, on uniform meshes."""
    if per_slice_elements < 1:
        raise ValueError(f"per_slice_elements must be >= 1, got {per_slice_elements}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    formulation = normalize_formulation(formulation)
    reports = []
    for n in range(1, n_max + 1):
        mesh = uniform_mesh(n * L, per_slice_elements * n, L=L)
        pair = subdivide(mesh, m)
        # the constant depends on the operator only; the load vector is irrelevant
        sys = GalerkinSystem(assemble_mass_L2(pair.fine), assemble_operator(pair, formulation),
                             np.zeros(pair.fine.dofs), formulation, pair)
        reports.append(discrete_inf_sup(sys, infsup_gram(mesh, formulation)))
    if out:
        write_infsup_csv(reports, out)
    return reports
