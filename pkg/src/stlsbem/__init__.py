"""Mixed least squares space-time boundary elements for the 1D wave equation."""

from .adaptivity import AdaptiveConfig, AdaptiveTrace, ConvergenceRecord, adapt, dorfler_mark, fit_rate
from .assembly import (GalerkinSystem, assemble_dtV, assemble_dual_mass, assemble_mass_L2,
                       assemble_MHT_V, assemble_rhs, assemble_V, build_system)
from .cases import CASES, BenchmarkCase, eval_case, get_case
from .experiments import StudySpec, run_convergence, run_infsup_study
from .kernel_ops import (PiecewiseConstant, SideFunction, apply_dtV, apply_K, apply_MHT_coeffs,
                         apply_V, potential_eval)
from .mesh import (SIDE0, SIDEL, LateralMesh, NestedPair, TemporalMesh, enforce_shift_constraint,
                   refine_marked, satisfies_shift_constraint, subdivide, uniform_mesh)
from .norms import DensityError, dual_norm, dual_norm_green, dual_norm_spectral, l2_norm, local_indicator
from .solver import (InfSupReport, MixedSolution, SingularSystemError, c_S, c_tilde_S,
                     discrete_inf_sup, gamma_theory, solve_mixed)

__version__ = "0.1.0"
