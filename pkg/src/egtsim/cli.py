"""Command-line front end: run scenarios, list builtins, analyze without integrating."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .analysis import AnalyticUnavailable, InsufficientData
from .dynamics import ComparisonRule, FormMismatch
from .games import DimensionMismatch, DomainError, OrderingViolation
from .integrate import IntegratorConfig, Method, NonFiniteState, StepLimitExceeded
from .scenarios import (
    OUT_DIR_ENV,
    ParseError,
    UnknownBuiltin,
    ValidationError,
    _analysis_report,
    builtin_names,
    load_scenario,
    run,
)

_EXIT_CONFIG = 1
_EXIT_IO = 2
_EXIT_INTEGRATION = 3
_EXIT_ANALYSIS = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egtsim",
        description="Simulate and analyze environment-coupled evolutionary games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario and write its report")
    p_run.add_argument("scenario", help="builtin name or scenario file path")
    p_run.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or ./egtsim_out)")
    p_run.add_argument("--method", choices=["rk4", "rk45"], help="override integrator method")
    p_run.add_argument("--t-end", type=float, dest="t_end", help="override time horizon")
    p_run.add_argument("--grid", type=int, help="override phase-grid resolution (0 disables)")
    p_run.add_argument("--rule", choices=["fitness", "entrywise"],
                       help="override the pairwise comparison rule")
    p_run.add_argument("--format", choices=["csv", "jsonl"], default="csv",
                       help="trajectory file format")
    p_run.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p_list = sub.add_parser("list-builtins", help="list built-in scenarios")

    p_an = sub.add_parser("analyze", help="fixed-point analysis only, no integration")
    p_an.add_argument("scenario", help="builtin name or scenario file path")
    p_an.add_argument("--rule", choices=["fitness", "entrywise"])
    p_an.add_argument("--out", help="write the report as JSON here instead of stdout")
    return parser


def _apply_overrides(scenario, args):
    integ = scenario.integrator
    changes = {}
    if getattr(args, "method", None):
        changes["method"] = Method(args.method)
    if getattr(args, "t_end", None):
        changes["t_end"] = args.t_end
    if changes:
        integ = dataclasses.replace(integ, **changes)
        scenario = dataclasses.replace(scenario, integrator=integ)
    if getattr(args, "grid", None) is not None:
        scenario = dataclasses.replace(
            scenario, analyses=dataclasses.replace(scenario.analyses, phase_grid=args.grid)
        )
    if getattr(args, "rule", None):
        rule = ComparisonRule.FITNESS_DIFFERENCE if args.rule == "fitness" else ComparisonRule.ENTRYWISE
        scenario = dataclasses.replace(scenario, comparison_rule=rule)
    return scenario


def _fail(category: str, exc: BaseException, code: int) -> int:
    print(f"egtsim: {category} error: {exc}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list-builtins":
        for name in builtin_names():
            scenario = load_scenario(name)
            print(f"{name:14s} {scenario.description}")
        return 0

    try:
        scenario = load_scenario(args.scenario)
        scenario = _apply_overrides(scenario, args)
    except (UnknownBuiltin, ParseError, ValidationError, OrderingViolation, DomainError) as exc:
        return _fail("config", exc, _EXIT_CONFIG)

    if args.command == "analyze":
        try:
            report = {
                "scenario": scenario.name,
                "protocols": {p.value: _analysis_report(scenario, p) for p in scenario.protocols},
            }
        except (AnalyticUnavailable, InsufficientData, FormMismatch, DimensionMismatch) as exc:
            return _fail("analysis", exc, _EXIT_ANALYSIS)
        text = json.dumps(report, indent=2)
        if args.out:
            try:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
            except OSError as exc:
                return _fail("IO", exc, _EXIT_IO)
        else:
            print(text)
        return 0

    # run
    out_dir = args.out or os.environ.get(OUT_DIR_ENV) or os.path.join("egtsim_out", scenario.name)
    try:
        summary = run(scenario, out_dir, figures=not args.no_figures, fmt=args.format)
    except (StepLimitExceeded, NonFiniteState) as exc:
        return _fail("integration", exc, _EXIT_INTEGRATION)
    except (AnalyticUnavailable, InsufficientData) as exc:
        return _fail("analysis", exc, _EXIT_ANALYSIS)
    except OSError as exc:
        return _fail("IO", exc, _EXIT_IO)
    n_traj = len(summary["trajectories"])
    print(f"egtsim: wrote {len(summary['files'])} files ({n_traj} trajectories) to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
