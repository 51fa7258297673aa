"""Command-line interface: ``solve``, ``bench``, ``profile`` and ``problems``.

Exit codes of ``solve``: 0 solved, 2 precision failure, 3 iteration limit,
4 configuration error, 5 stalled.  Other commands return 0 on success, 4 on a
configuration error and 1 on an I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BadDimension, InvalidConfig, UnknownProblem
from .harness import (
    PROFILE_METRICS,
    REPORT_FORMATS,
    emit_report,
    format_table,
    load_suite,
    parse_selection,
    performance_profile,
    plot_profiles,
    profile_costs,
    run_suite,
    write_profile_csv,
)
from .problems import default_dimension, get_problem, legal_dimensions, problem_names
from .solver import SolverConfig, load_config, solve
from .solver.config import parse_mode
from .solver.report import FIRST_ORDER, MAX_ITER, PRECISION_FAILURE, STALLED, write_trace

EXIT_SOLVED, EXIT_IO, EXIT_PRECISION, EXIT_MAX_ITER, EXIT_CONFIG, EXIT_STALLED = 0, 1, 2, 3, 4, 5
STATUS_EXIT = {FIRST_ORDER: EXIT_SOLVED, PRECISION_FAILURE: EXIT_PRECISION, MAX_ITER: EXIT_MAX_ITER,
               STALLED: EXIT_STALLED}


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file with solver settings")
    p.add_argument("--eps", help="gradient-norm tolerance")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--sigma0", help="initial regularization (power of two)")
    p.add_argument("--gamma-formula", choices=["nu", "higham", "castaldo"])
    p.add_argument("--rho-correction", action="store_true", default=None,
                   help="account for rounding in the acceptance ratio")
    p.add_argument("--formats", help="comma-separated format stack, lowest precision first")


def _overrides(args, **extra) -> dict:
    out = {
        "eps": args.eps,
        "max_iter": args.max_iter,
        "sigma0": args.sigma0,
        "gamma_formula": args.gamma_formula,
        "rho_correction": args.rho_correction,
        "formats": args.formats,
    }
    out.update(extra)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpr2", description="Multi-precision quadratic regularization.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one problem")
    s.add_argument("problem")
    s.add_argument("-n", "--dim", type=int, help="dimension (default: the problem's default)")
    s.add_argument("--mode", help="r2, mpr2_guaranteed or mpr2_relaxed")
    s.add_argument("--relax-a", help="relaxation factor a in (0, 1] for the relaxed mode")
    s.add_argument("--check-invariants", action="store_true", default=None)
    s.add_argument("--trace", help="write the iteration trace as JSON lines to this path")
    s.add_argument("--json", action="store_true", help="print the run report as JSON")
    _add_solver_flags(s)

    b = sub.add_parser("bench", help="run a problem suite under several solvers")
    b.add_argument("--suite", default="default", help="'default' or a comma list of name[:n]")
    b.add_argument("--modes", default="r2,mpr2_relaxed", help="comma list of solver modes")
    b.add_argument("--relax-a", default="1", help="comma list of relaxation factors for relaxed runs")
    b.add_argument("--out", default="bench_out", help="output directory")
    b.add_argument("--report", default="csv,json,text", help=f"comma list from {', '.join(REPORT_FORMATS)}")
    b.add_argument("--workers", type=int, default=1)
    _add_solver_flags(b)

    pr = sub.add_parser("profile", help="performance profiles from a bench directory")
    pr.add_argument("--in", dest="inp", required=True, help="bench output directory or suite.json")
    pr.add_argument("--out", required=True, help="CSV path; a PNG with the same stem is written too")
    pr.add_argument("--metrics", default=",".join(PROFILE_METRICS))
    pr.add_argument("--no-plot", action="store_true")

    sub.add_parser("problems", help="list the built-in problems")
    return ap


def _cmd_solve(args) -> int:
    extra = {"mode": args.mode, "relax_a": args.relax_a, "check_invariants": args.check_invariants}
    cfg = load_config(args.config, _overrides(args, **extra))
    problem = get_problem(args.problem, args.dim)
    report = solve(problem, cfg)
    if args.trace:
        write_trace(report.trace, args.trace)
    if args.json:
        print(json.dumps(report.to_dict(), default=str))
    else:
        print(f"{problem.name} n={problem.n} solver={report.solver} status={report.status} "
              f"iterations={report.iterations} successful={report.successful}")
        print(f"f={report.f!r} gnorm={report.gnorm!r} x_format={report.x_format}")
        for kind, per in report.counters.to_dict().items():
            cells = ", ".join(f"{fmt} {v['success']}/{v['total']}" for fmt, v in per.items())
            print(f"{kind}: {cells}")
        if report.message:
            print(f"note: {report.message}")
        for v in report.violations:
            print(f"violation: {v}")
    return STATUS_EXIT[report.status]


def _bench_configs(args) -> list[SolverConfig]:
    base = load_config(args.config, _overrides(args))
    configs = []
    for m in args.modes.split(","):
        mode = parse_mode(m)
        if mode == "mpr2_relaxed":
            for a in args.relax_a.split(","):
                configs.append(base.replace(mode=mode, relax_a=a.strip()))
        else:
            configs.append(base.replace(mode=mode))
    return configs


def _cmd_bench(args) -> int:
    configs = _bench_configs(args)
    selection = parse_selection(args.suite)
    fmts = [f.strip() for f in args.report.split(",") if f.strip()]
    for f in fmts:
        if f not in REPORT_FORMATS:
            raise InvalidConfig(f"unknown report format {f!r}")
    report = run_suite(configs, selection, workers=args.workers)
    if "json" not in fmts:
        fmts.append("json")  # profile reads suite.json
    for f in fmts:
        for path in emit_report(report, f, args.out):
            print(f"wrote {path}")
    sys.stdout.write(format_table(report))
    return 0


def _cmd_profile(args) -> int:
    report = load_suite(args.inp)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    profiles = {m: performance_profile(profile_costs(report, m)) for m in metrics}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_profile_csv(profiles, out)
    print(f"wrote {out}")
    if not args.no_plot and report.solvers:
        png = out.with_suffix(".png")
        plot_profiles(profiles, png)
        print(f"wrote {png}")
    return 0


def _cmd_problems(args) -> int:
    for name in problem_names():
        p = get_problem(name, default_dimension(name))
        print(f"{name:<22} n in {legal_dimensions(name):<22} {p.description}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": _cmd_solve, "bench": _cmd_bench, "profile": _cmd_profile,
               "problems": _cmd_problems}[args.command]
    try:
        return handler(args)
    except (InvalidConfig, UnknownProblem, BadDimension) as exc:
        msg = exc.args[0] if isinstance(exc, UnknownProblem) and exc.args else exc
        print(f"mpr2: configuration error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"mpr2: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser", "STATUS_EXIT"]
