"""Command-line surface.

Exit codes: 0 success, 1 invalid input or usage, 2 numerically
inconclusive primary result.
"""

from __future__ import annotations

import argparse
import sys

from . import families, model, report
from .model import ToleranceConfig, load_instance, save_instance, validate
from .recession import qpr_solve, recession_cone
from .regularity import slater_point
from .solver import SolverConfig, solve_global
from .stability import PerturbationSpec, check_theorem_conditions, stability_sweep

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONCLUSIVE = 2


def _add_common(p):
    p.add_argument("--out", help="output path (default: stdout for json)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feas-tol", type=float, default=1e-8)
    p.add_argument("--kernel-tol", type=float, default=1e-8)
    p.add_argument("--value-tol", type=float, default=1e-9)
    p.add_argument("--psd-tol", type=float, default=1e-9)
    p.add_argument("--restarts", type=int, default=40)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qcqp-stability",
        description="Analyze parametric nonconvex quadratic programs under "
                    "convex quadratic constraints: solve, check stability "
                    "conditions, and run perturbation sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, helptext in (
            ("validate", "check instance invariants"),
            ("solve", "global solve at desk scale"),
            ("recession", "recession cone of the feasible set"),
            ("qpr", "triviality of the recession program"),
            ("regularity", "Slater regularity of the constraints"),
            ("conditions", "theorem condition flags and predictions"),
            ("stability", "perturbation sweep of all stability moduli")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", help="JSON problem file")
        _add_common(p)
        if name == "stability":
            p.add_argument("--deltas", type=float, nargs="+",
                           default=[0.1, 0.03, 0.01])
            p.add_argument("--samples", type=int, default=8)
            p.add_argument("--no-plot", action="store_true",
                           help="skip the figure next to CSV output")

    p = sub.add_parser("repro", help="rebuild a built-in example family "
                                     "and run the full analysis")
    p.add_argument("family", choices=families.FAMILY_IDS)
    p.add_argument("--n", type=int, default=4, help="truncation dimension")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--perturbed", action="store_true")
    p.add_argument("--problem-out", help="also write the generated problem file")
    _add_common(p)
    return ap


def _tols(args) -> ToleranceConfig:
    return ToleranceConfig(feas_tol=args.feas_tol, kernel_tol=args.kernel_tol,
                           value_tol=args.value_tol, psd_tol=args.psd_tol,
                           seed=args.seed)


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(restarts=args.restarts, seed=args.seed)


def _emit(payload: dict, args) -> None:
    if args.out:
        report.write_json(payload, args.out)
    else:
        import json
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _load(args):
    try:
        return load_instance(args.input)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot load {args.input}: {exc}", file=sys.stderr)
        return None


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK

    tols = _tols(args)
    cfg = _solver_cfg(args)

    if args.command == "repro":
        try:
            inst = families.make_family(args.family, args.n, args.eps,
                                        args.perturbed)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        if args.problem_out:
            save_instance(inst, args.problem_out)
        res = solve_global(inst, cfg, tols)
        cond = check_theorem_conditions(inst, cfg, tols, base=res)
        payload = {
            "family": args.family,
            "n": args.n,
            "instance": model.to_dict(inst),
            "solve": report.solve_result_to_dict(res),
            "conditions": report.conditions_to_dict(cond),
        }
        _emit(payload, args)
        return EXIT_INCONCLUSIVE if res.status == "Inconclusive" else EXIT_OK

    inst = _load(args)
    if inst is None:
        return EXIT_INVALID

    if args.command == "validate":
        diags = validate(inst, tols)
        _emit(report.diagnostics_to_dict(diags), args)
        return EXIT_OK if not diags else EXIT_INVALID

    diags = validate(inst, tols)
    if diags:
        for d in diags:
            print(f"error: invalid instance: {d}", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "solve":
        res = solve_global(inst, cfg, tols)
        _emit(report.solve_result_to_dict(res), args)
        return EXIT_INCONCLUSIVE if res.status == "Inconclusive" else EXIT_OK

    if args.command == "recession":
        cone = recession_cone(inst, tols)
        _emit(report.recession_to_dict(cone), args)
        return EXIT_OK

    if args.command == "qpr":
        cone = recession_cone(inst, tols)
        verdict = qpr_solve(inst, cone, tols)
        _emit(report.qpr_to_dict(verdict), args)
        return EXIT_INCONCLUSIVE if verdict.inconclusive else EXIT_OK

    if args.command == "regularity":
        reg = slater_point(inst, tols)
        _emit(report.regularity_to_dict(reg), args)
        return EXIT_INCONCLUSIVE if reg.status == "Inconclusive" else EXIT_OK

    if args.command == "conditions":
        cond = check_theorem_conditions(inst, cfg, tols)
        _emit(report.conditions_to_dict(cond), args)
        unknown = any(v is None for v in (cond.cond_i, cond.cond_ii, cond.cond_iii))
        return EXIT_INCONCLUSIVE if unknown else EXIT_OK

    if args.command == "stability":
        spec = PerturbationSpec(radius_schedule=tuple(args.deltas),
                                samples_per_radius=args.samples, seed=args.seed)
        rep = stability_sweep(inst, spec, cfg, tols)
        if args.out:
            report.emit_stability(rep, args.format, args.out,
                                  plot=not args.no_plot)
        else:
            _emit(report.stability_to_dict(rep), args)
        return EXIT_OK if rep.applicable else EXIT_INCONCLUSIVE

    print(f"error: unknown command {args.command!r}", file=sys.stderr)
    return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
