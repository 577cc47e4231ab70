"""Command line front door: gen, solve, validate, sweep, report, serve.

Exit code 0 means the tool answered, even when that answer is "infeasible";
exit code 1 is for bad inputs and failed validation.  Sweep and report share
the same generator flags, the difference is what they write: sweep emits the
raw per-instance table, report the full plot-ready bundle.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .configs import enumerate_all
from .generator import GeneratorParams, generate
from .ilp import build_model
from .io import (
    read_instance,
    read_solution,
    solution_csv,
    write_instance,
    write_solution,
)
from .model import TapError, Validator
from .report import run_experiment
from .solve import SolverParams, solve_model


def _size(text: str) -> tuple[int, int]:
    """'24x4' -> (24, 4)."""
    try:
        t, c = text.lower().split("x")
        return int(t), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected TUTORSxCOURSES, e.g. 24x4, got {text!r}"
        ) from None


def _sizes(text: str) -> list[tuple[int, int]]:
    return [_size(part) for part in text.split(",") if part]


def _seeds(text: str) -> list[int]:
    """'0:30' -> range, '3,7,9' -> list, '5' -> [5]."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi)))
    return [int(part) for part in text.split(",") if part]


def _pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected LO:HI, got {text!r}"
        ) from None


def _gen_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--locations", type=int, default=2)
    sub.add_argument("--max-prefs", type=int, default=3,
                     help="preference list length cap")
    sub.add_argument("--max-courses", type=int, default=3)
    sub.add_argument("--compat", type=float, default=0.37,
                     help="target tutor-course compatibility rate")
    sub.add_argument("--hours", type=_pair, default=(80.0, 120.0),
                     metavar="LO:HI", help="tutor max-hours window")
    sub.add_argument("--zero-min-rate", type=float, default=None,
                     help="share of tutors with no lower hour bound")


def _gen_params(args: argparse.Namespace, n_tutors: int,
                n_courses: int) -> GeneratorParams:
    params = GeneratorParams(
        n_tutors=n_tutors,
        n_courses=n_courses,
        n_locations=args.locations,
        max_preferences=args.max_prefs,
        max_courses=args.max_courses,
        compatibility_rate=args.compat,
        hours_range=args.hours,
        seed=args.seed,
    )
    if args.zero_min_rate is not None:
        params = replace(params, min_hours_zero_rate=args.zero_min_rate)
    return params


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_gen(args: argparse.Namespace) -> int:
    n_tutors, n_courses = args.size
    inst = generate(_gen_params(args, n_tutors, n_courses))
    _write(args.out, write_instance(inst))
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    inst = read_instance(Path(args.instance).read_text())
    configs = enumerate_all(inst)
    sol = solve_model(
        build_model(inst, configs),
        params=SolverParams(time_limit_seconds=args.time_limit),
    )
    print(f"{sol.status}  objective={sol.objective:.6f}"
          f"  wall={sol.solve_seconds:.2f}s", file=sys.stderr)
    _write(args.out, write_solution(sol))
    if args.csv:
        Path(args.csv).write_text(solution_csv(inst, configs, sol))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    inst = read_instance(Path(args.instance).read_text())
    configs = enumerate_all(inst)
    if args.solution is None:
        print(f"instance ok: {len(inst.tutors)} tutors,"
              f" {len(inst.courses)} courses,"
              f" {len(configs.configurations)} configurations")
        return 0
    sol = read_solution(Path(args.solution).read_text())
    violations = Validator(inst, configs).validate(sol)
    for v in violations:
        print(v, file=sys.stderr)
    if violations:
        return 1
    print("solution ok")
    return 0


def _experiment(args: argparse.Namespace):
    def echo(row):
        print(f"({row.n_tutors},{row.n_courses}) seed={row.seed}"
              f" {row.status} objective={row.objective:.4f}"
              f" wall={row.solve_seconds:.2f}s", file=sys.stderr)

    return run_experiment(
        args.sizes,
        args.seeds,
        _gen_params(args, 1, 1),
        solver_params=SolverParams(time_limit_seconds=args.time_limit),
        progress=echo if not args.quiet else None,
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    _write(args.out, _experiment(args).instances_csv())
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    report = _experiment(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "cells.csv").write_text(report.cells_csv())
    (out / "instances.csv").write_text(report.instances_csv())
    (out / "satisfaction.csv").write_text(report.satisfaction_csv())
    print(f"wrote cells.csv, instances.csv, satisfaction.csv to {out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        worker_count=args.workers,
        default_params=SolverParams(time_limit_seconds=args.time_limit),
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tap", description="tutor allocation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--size", type=_size, required=True, metavar="TxC",
                   help="tutors x courses, e.g. 24x4")
    _gen_flags(p)
    p.add_argument("--out", default="-")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--out", default="-")
    p.add_argument("--csv", default=None,
                   help="also write the roster table here")
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("validate",
                       help="check an instance, optionally a solution")
    p.add_argument("instance")
    p.add_argument("solution", nargs="?", default=None)
    p.set_defaults(run=cmd_validate)

    for name, runner, out_help in (
        ("sweep", cmd_sweep, "per-instance CSV (default stdout)"),
        ("report", cmd_report, "directory for the three report tables"),
    ):
        p = sub.add_parser(name, help=f"run sizes x seeds, emit {name} output")
        p.add_argument("--sizes", type=_sizes, required=True,
                       metavar="TxC,TxC,...")
        p.add_argument("--seeds", type=_seeds, default=[0], metavar="LO:HI")
        p.add_argument("--time-limit", type=float, default=60.0)
        p.add_argument("--quiet", action="store_true")
        _gen_flags(p)
        if name == "report":
            p.add_argument("--out", required=True, help=out_help)
        else:
            p.add_argument("--out", default="-", help=out_help)
        p.set_defaults(run=runner)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default=os.environ.get("TAP_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("TAP_PORT", "8000")))
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("TAP_WORKERS", "2")),
                   help="concurrent solver worker cap")
    p.add_argument("--time-limit", type=float,
                   default=float(os.environ.get("TAP_TIME_LIMIT", "3600")),
                   help="default per-job solver budget in seconds")
    p.set_defaults(run=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
