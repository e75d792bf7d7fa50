"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 every grid point
degenerate.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Optional, Sequence

from .config import load_config
from .errors import ComplementarityError
from .montecarlo import DEFAULT_SHOTS_BUDGET, SeedSpec
from .sweep import (
    PRESETS,
    Engine,
    OutputFormat,
    RunSpec,
    emit,
    preset_spec,
    run_spec,
    two_term_discrepancy,
    uniform_grid,
)

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engine", choices=[e.value for e in Engine])
    p.add_argument("--seed", type=int, help="64-bit seed (required for monte-carlo)")
    p.add_argument("--stream", type=int, default=None)
    p.add_argument("--shots", type=int, help="shots per grid point (monte-carlo)")
    p.add_argument("--grid-points", type=int)
    p.add_argument("--format", choices=[f.value for f in OutputFormat])
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--workers", type=int, default=1, help="threads for the sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="complementarity",
        description="Visibility/predictability sweeps of a lossy two-path interferometer.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("preset", help="run a named figure preset")
    p.add_argument("name", choices=sorted(PRESETS))
    _add_common(p)
    p = sub.add_parser("run", help="run a configuration file")
    p.add_argument("config")
    _add_common(p)
    sub.add_parser("list", help="list presets")
    return parser


def _apply_flags(spec: RunSpec, args) -> RunSpec:
    changes = {}
    if args.engine:
        changes["engine"] = Engine(args.engine)
    if args.grid_points is not None:
        changes["grid"] = uniform_grid(args.grid_points)
    if args.format:
        changes["output_format"] = OutputFormat(args.format)
    if args.shots is not None:
        changes["shots_budget"] = args.shots
    if args.seed is not None or args.stream is not None:
        base = spec.seed or SeedSpec()
        changes["seed"] = SeedSpec(
            base.seed if args.seed is None else args.seed,
            base.stream if args.stream is None else args.stream,
        )
    engine = changes.get("engine", spec.engine)
    if engine is Engine.MONTE_CARLO and changes.get("shots_budget", spec.shots_budget) is None:
        changes["shots_budget"] = DEFAULT_SHOTS_BUDGET
    return dataclasses.replace(spec, **changes) if changes else spec


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "list":
            for name, (scenario, loss, corrected) in PRESETS.items():
                extra = " corrected" if corrected else ""
                print(
                    f"{name}\tconfig={int(scenario.config)} placement={loss.placement.value}"
                    f" l1={loss.l1:g} l2={loss.l2:g}{extra}"
                )
            return EXIT_OK
        if args.workers < 1:
            raise _UsageError("--workers must be positive")
        if args.command == "preset":
            spec = preset_spec(args.name)
        else:
            spec = load_config(args.config)
        spec = _apply_flags(spec, args)
        table = run_spec(spec, workers=args.workers)
        emit(table, spec.output_format, args.out)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ComplementarityError, OSError) as exc:
        print(f"complementarity: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    gap = two_term_discrepancy(table)
    if gap is not None:
        print(
            f"complementarity: note: printed and simulated P^2 differ by up to {gap:.6g}",
            file=sys.stderr,
        )
    if table.all_degenerate:
        print("complementarity: every grid point is degenerate", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
