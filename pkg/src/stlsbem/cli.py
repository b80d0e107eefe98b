"""Command line front end: stlsbem {solve,convergence,adapt,infsup,dump-mesh}."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

import numpy as np

from . import adaptivity, assembly, experiments
from .cases import CASES, get_case
from .mesh import format_mesh, subdivide, uniform_mesh
from .norms import DensityError, dual_norm_green, l2_error
from .solver import SingularSystemError, schur_quadratic_form, solve_mixed

log = logging.getLogger("stlsbem")

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


def _bool(text: str) -> bool:
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"theta must lie in (0, 1), got {v}")
    return v


def _common(p, m_default=3):
    p.add_argument("--case", choices=sorted(CASES), default="g1")
    p.add_argument("--formulation", choices=["standard", "energetic", "mht", "direct"],
                   default="standard")
    p.add_argument("--m", type=_positive_int, default=m_default, help="fine subdivision factor")
    p.add_argument("--quad-order", type=_positive_int, default=8)
    p.add_argument("--mht-modes", type=_positive_int, default=None,
                   help="truncation of the sine/cosine expansion (default: adapted to the mesh)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stlsbem",
        description="Mixed least squares space-time BEM for the 1D wave equation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("solve", help="solve on one uniform mesh")
    _common(p)
    p.add_argument("--elements", type=_positive_int, default=8, help="coarse elements per side")
    p.add_argument("--seed", type=int, default=None,
                   help="also check the Schur bound on random densities drawn with this seed")
    p.add_argument("--dump-matrices", metavar="DIR", default=None,
                   help="write D, V and rhs as plain text into DIR")

    p = sub.add_parser("convergence", help="convergence study")
    _common(p)
    p.add_argument("--levels", type=_positive_int, default=6)
    p.add_argument("--refinement", choices=experiments.REFINEMENTS, default="uniform")
    p.add_argument("--theta", type=_fraction, default=0.5)

    p = sub.add_parser("adapt", help="adaptive refinement loop")
    _common(p)
    p.add_argument("--iters", type=_positive_int, default=15)
    p.add_argument("--theta", type=_fraction, default=0.5)
    p.add_argument("--constrained", type=_bool, default=True)
    p.add_argument("--elements", type=_positive_int, default=8)

    p = sub.add_parser("infsup", help="discrete inf-sup constants for T = n L")
    p.add_argument("--formulation", choices=["standard", "energetic", "mht", "direct"],
                   default="energetic")
    p.add_argument("--m", type=_positive_int, default=1)
    p.add_argument("--n-max", type=_positive_int, default=8)
    p.add_argument("--per-slice", type=_positive_int, default=32)
    p.add_argument("--out", default=None)

    p = sub.add_parser("dump-mesh", help="print a coarse mesh (optionally after adaptation)")
    _common(p)
    p.add_argument("--elements", type=_positive_int, default=8)
    p.add_argument("--iters", type=int, default=0, help="adaptive iterations before dumping")
    p.add_argument("--theta", type=_fraction, default=0.5)
    p.add_argument("--constrained", type=_bool, default=True)
    return parser


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> int:
    case = get_case(args.case)
    mesh = uniform_mesh(case.T, args.elements, L=case.L)
    pair = subdivide(mesh, args.m)
    system = assembly.build_system(pair, case.g, args.formulation, args.quad_order, args.mht_modes)
    if args.dump_matrices:
        os.makedirs(args.dump_matrices, exist_ok=True)
        for name, arr in (("D", system.D), ("V", system.V), ("rhs", system.rhs)):
            assembly.dump_matrix(os.path.join(args.dump_matrices, f"{name}.txt"), arr)
    sol = solve_mixed(system)
    exact = experiments._exact_for(case, system.formulation)
    err = DensityError(exact, sol.w)
    print(f"dofs_coarse={mesh.dofs} dofs_fine={pair.fine.dofs} "
          f"indicator_l2={float(np.sqrt(np.sum(system.D * sol.p.vector ** 2))):.6e} "
          f"error_dual={dual_norm_green(err):.6e} error_l2={l2_error(err):.6e}", file=sys.stderr)
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        M = assembly.assemble_dual_mass(mesh)
        ratios = []
        for _ in range(20):
            w = rng.standard_normal(mesh.dofs)
            ratios.append(schur_quadratic_form(system, w) / (w @ M @ w))
        print(f"min (S w, w) / (M w, w) over 20 random densities: {min(ratios):.6e}",
              file=sys.stderr)
    lines = ["side,left,right,w"]
    for s, tm in enumerate(mesh.sides):
        for a, b, c in zip(tm.left, tm.right, sol.w.coeffs[s]):
            lines.append(f"{s},{float(a)!r},{float(b)!r},{float(c)!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_convergence(args) -> int:
    spec = experiments.StudySpec(args.case, args.formulation, args.refinement, args.m,
                                 args.levels, None, args.theta, quad_order=args.quad_order,
                                 mht_modes=args.mht_modes)
    records = experiments.run_convergence(spec)
    if args.out:
        experiments.write_convergence_csv(records, args.out)
    else:
        experiments.write_convergence_csv(records, sys.stdout)
    ok = [r for r in records if not r.failed]
    try:
        rate = adaptivity.fit_rate([r.dofs_coarse for r in ok], [r.error_dual for r in ok])
        print(f"fitted dual-norm error rate: {rate:.4f}", file=sys.stderr)
    except ValueError as exc:
        print(f"no rate fitted: {exc}", file=sys.stderr)
    if any(r.failed for r in records):
        print("some levels failed (singular system)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _run_adapt(args, iters):
    case = get_case(args.case)
    cfg = adaptivity.AdaptiveConfig(theta=args.theta, max_iters=iters, m=args.m,
                                    constrained=args.constrained, formulation=args.formulation,
                                    quad_order=args.quad_order, mht_modes=args.mht_modes)
    exact = experiments._exact_for(case, cfg.formulation)
    return adaptivity.adapt(case.g, exact, uniform_mesh(case.T, args.elements, L=case.L), cfg)


def _cmd_adapt(args) -> int:
    trace = _run_adapt(args, args.iters)
    adaptivity.write_trace_csv(trace, args.out if args.out else sys.stdout)
    if trace.message:
        print(trace.message, file=sys.stderr)
    return EXIT_NUMERICAL if trace.failed else EXIT_OK


def _cmd_infsup(args) -> int:
    reports = experiments.run_infsup_study(args.n_max, args.per_slice, args.formulation, args.m)
    experiments.write_infsup_csv(reports, args.out if args.out else sys.stdout)
    return EXIT_OK


def _cmd_dump_mesh(args) -> int:
    case = get_case(args.case)
    if args.iters < 0:
        raise _UsageError(f"--iters must be >= 0, got {args.iters}")
    if args.iters == 0:
        mesh = uniform_mesh(case.T, args.elements, L=case.L)
    else:
        trace = _run_adapt(args, args.iters)
        if not trace.records:
            print(trace.message, file=sys.stderr)
            return EXIT_NUMERICAL
        mesh = trace.records[-1].mesh
    _emit(format_mesh(mesh), args.out)
    return EXIT_OK


class _UsageError(Exception):
    pass


COMMANDS = {
    "solve": _cmd_solve,
    "convergence": _cmd_convergence,
    "adapt": _cmd_adapt,
    "infsup": _cmd_infsup,
    "dump-mesh": _cmd_dump_mesh,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("solve", "adapt") and args.formulation == "standard" and args.m < 3:
        warnings.warn(f"standard formulation with m={args.m}: stability and indicator "
                      "reliability need m >= 3", UserWarning)
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"stlsbem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularSystemError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
