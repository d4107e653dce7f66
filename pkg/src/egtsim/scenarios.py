"""Declarative scenarios, built-in example catalog, runs and exports.

A scenario bundles a game, an optional environment coupling, one or two
revision protocols, initial conditions, integrator settings and the
requested analyses.  Scenarios live in flat INI files (one scenario per
file) or come from the built-in catalog, which reproduces the worked
examples with their exact parameters.

``run`` integrates every (protocol, initial condition) pair, writes one
delimited trajectory file per pair, a fixed-point report, an optional
phase-grid file, rendered figures, a machine-readable summary and a
human-readable log.  Outputs carry no timestamps, so two runs of the
same scenario produce identical files.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .analysis import (
    CatalogUnavailable,
    detect_oscillation,
    find_fixed_points,
    pd_defection_rest_points,
)
from .dynamics import (
    ClosedForm,
    ComparisonRule,
    Field,
    PopulationState,
    Protocol,
    make_closed_form_field,
    make_pairwise_field,
    make_replicator_field,
)
from .games import DomainError, EnvCoupling, GameKind, GameSpec, OrderingViolation, validate_spec
from .integrate import IntegratorConfig, Method, Trajectory, integrate, sample_phase_grid

__all__ = [
    "Analyses",
    "Scenario",
    "ParseError",
    "ValidationError",
    "UnknownBuiltin",
    "EmptyTrajectory",
    "builtin_names",
    "load_scenario",
    "scenario_field",
    "run",
    "export_trajectory",
    "read_trajectory_jsonl",
    "OUT_DIR_ENV",
]

OUT_DIR_ENV = "EGTSIM_OUT_DIR"


class ParseError(ValueError):
    """Scenario file could not be parsed."""


class ValidationError(ValueError):
    """Scenario contents violate an invariant."""


class UnknownBuiltin(KeyError):
    """No built-in scenario under that name."""


class EmptyTrajectory(ValueError):
    """Export requested for a trajectory without samples."""


@dataclass(frozen=True)
class Analyses:
    fixed_points: bool = True
    jacobians: bool = True
    oscillation: bool = True
    phase_grid: int = 0
    oscillation_window: float | None = None  # default: t_end / 3
    search_resolution: int | None = None

    def __post_init__(self) -> None:
        if self.phase_grid and self.phase_grid < 2:
            raise ValidationError("phase_grid resolution must be at least 2")


@dataclass(frozen=True)
class Scenario:
    name: str
    game: GameSpec
    coupling: EnvCoupling | None
    protocols: tuple[Protocol, ...]
    comparison_rule: ComparisonRule
    initial_conditions: tuple[PopulationState, ...]
    integrator: IntegratorConfig
    analyses: Analyses = Analyses()
    closed_form: bool = False  # integrate the polynomial closed-form model instead
    strict: bool = True
    description: str = ""

    def __post_init__(self) -> None:
        if not self.protocols:
            raise ValidationError("scenario needs at least one protocol")
        wants_analysis = self.analyses.fixed_points or self.analyses.phase_grid
        if not self.initial_conditions and not wants_analysis:
            raise ValidationError("scenario needs initial conditions or at least one analysis")
        for ic in self.initial_conditions:
            if len(ic.x) != self.game.n_strategies - 1:
                raise ValidationError(
                    f"initial condition {ic.x} has {len(ic.x)} strategy coordinates, "
                    f"{self.game.kind.value} needs {self.game.n_strategies - 1}"
                )


def scenario_field(scenario: Scenario, protocol: Protocol) -> Field:
    """The field this scenario integrates for one protocol."""
    spec, coupling = scenario.game, scenario.coupling
    if scenario.closed_form:
        if spec.kind is GameKind.PD and coupling is None:
            form = ClosedForm.REPLICATOR_PD if protocol is Protocol.REPLICATOR else ClosedForm.PAIRWISE_PD
        elif spec.kind is GameKind.PD:
            if protocol is Protocol.PAIRWISE:
                form = ClosedForm.PAIRWISE_PD_FEEDBACK
            else:
                raise ValidationError("no closed-form model for the coupled replicator PD scenario")
        else:
            form = (
                ClosedForm.REPLICATOR_OPD_FEEDBACK
                if protocol is Protocol.REPLICATOR
                else ClosedForm.PAIRWISE_OPD_FEEDBACK
            )
        return make_closed_form_field(form, spec, coupling)
    if protocol is Protocol.REPLICATOR:
        return make_replicator_field(spec, coupling)
    return make_pairwise_field(spec, coupling, scenario.comparison_rule)


# --- built-in catalog ---------------------------------------------------------

def _pd_game() -> GameSpec:
    return GameSpec(kind=GameKind.PD, R=3.0, S=0.0, T=5.0, P=1.0)


def _builtin_example1() -> Scenario:
    return Scenario(
        name="example1",
        game=_pd_game(),
        coupling=None,
        protocols=(Protocol.REPLICATOR, Protocol.PAIRWISE),
        comparison_rule=ComparisonRule.FITNESS_DIFFERENCE,
        initial_conditions=(PopulationState(x=(0.9,), n=1.0),),
        integrator=IntegratorConfig(t_end=30.0),
        analyses=Analyses(phase_grid=0, oscillation_window=10.0),
        description="uncoupled dilemma where defection takes over, both protocols",
    )


def _builtin_example2() -> Scenario:
    return Scenario(
        name="example2",
        game=GameSpec(kind=GameKind.PD, R=5.0, S=1.0, T=3.0, P=0.0),
        coupling=None,
        protocols=(Protocol.REPLICATOR, Protocol.PAIRWISE),
        comparison_rule=ComparisonRule.FITNESS_DIFFERENCE,
        initial_conditions=(PopulationState(x=(0.1,), n=1.0),),
        integrator=IntegratorConfig(t_end=30.0),
        analyses=Analyses(fixed_points=False, oscillation_window=10.0),
        strict=False,  # payoffs deliberately favour cooperation
        description="inverted payoffs where cooperation takes over, both protocols",
    )


def _builtin_example3() -> Scenario:
    return Scenario(
        name="example3",
        game=_pd_game(),
        coupling=EnvCoupling(lam=2.0, epsilon=0.1),
        protocols=(Protocol.PAIRWISE,),
        comparison_rule=ComparisonRule.FITNESS_DIFFERENCE,
        initial_conditions=(
            PopulationState(x=(0.9,), n=0.9),
            PopulationState(x=(0.9,), n=0.7),
            PopulationState(x=(0.1,), n=0.3),
            PopulationState(x=(0.1,), n=0.1),
        ),
        integrator=IntegratorConfig(t_end=200.0),
        analyses=Analyses(phase_grid=15, oscillation_window=50.0),
        closed_form=True,  # the quadratic model, whose interior point is a center
        description="environment-coupled pairwise dilemma orbiting its interior point",
    )


def _opd_game() -> GameSpec:
    return GameSpec(kind=GameKind.OPD, R=3.0, S=0.0, T=5.0, P=1.0, L=2.0)


def _builtin_example4_rd() -> Scenario:
    return Scenario(
        name="example4_rd",
        game=_opd_game(),
        coupling=EnvCoupling(lam=2.0, epsilon=0.5),
        protocols=(Protocol.REPLICATOR,),
        comparison_rule=ComparisonRule.FITNESS_DIFFERENCE,
        initial_conditions=(
            PopulationState(x=(0.9, 0.1), n=0.1),
            PopulationState(x=(0.1, 0.9), n=0.9),
        ),
        integrator=IntegratorConfig(t_end=300.0),
        analyses=Analyses(phase_grid=8, oscillation_window=100.0),
        description="optional game under replicator dynamics: cycles without abstainers",
    )


def _builtin_example4_pcd() -> Scenario:
    return Scenario(
        name="example4_pcd",
        game=_opd_game(),
        coupling=EnvCoupling(lam=2.0, epsilon=0.5),
        protocols=(Protocol.PAIRWISE,),
        # the entrywise rate reading, whose interior point attracts everything
        comparison_rule=ComparisonRule.ENTRYWISE,
        initial_conditions=(
            PopulationState(x=(0.9, 0.1), n=0.1),
            PopulationState(x=(0.1, 0.9), n=0.9),
        ),
        integrator=IntegratorConfig(t_end=300.0),
        analyses=Analyses(phase_grid=8, oscillation_window=100.0),
        description="optional game under pairwise comparison: everything converges inward",
    )


_BUILTINS = {
    "example1": _builtin_example1,
    "example2": _builtin_example2,
    "example3": _builtin_example3,
    "example4_rd": _builtin_example4_rd,
    "example4_pcd": _builtin_example4_pcd,
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


# --- config files ---------------------------------------------------------------

_PROTOCOLS = {
    "replicator": (Protocol.REPLICATOR,),
    "rd": (Protocol.REPLICATOR,),
    "pairwise": (Protocol.PAIRWISE,),
    "pcd": (Protocol.PAIRWISE,),
    "both": (Protocol.REPLICATOR, Protocol.PAIRWISE),
}

_RULES = {
    "fitness": ComparisonRule.FITNESS_DIFFERENCE,
    "entrywise": ComparisonRule.ENTRYWISE,
}


def _get(parser, section, key, conv, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ParseError(f"missing [{section}] {key}")
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"[{section}] {key} = {raw!r}: {exc}") from None


def _as_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def load_scenario(source: str | os.PathLike) -> Scenario:
    """Load a scenario from a built-in name or an INI file path."""
    name = str(source)
    if name in _BUILTINS:
        return _BUILTINS[name]()
    path = Path(source)
    if not path.exists():
        if "/" not in name and "\\" not in name and not name.endswith(".ini"):
            raise UnknownBuiltin(
                f"unknown builtin {name!r}; available: {', '.join(builtin_names())}"
            )
        raise ParseError(f"scenario file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except (configparser.Error, OSError) as exc:
        raise ParseError(f"{path}: {exc}") from None

    for required in ("scenario", "game"):
        if not parser.has_section(required):
            raise ParseError(f"{path}: missing [{required}] section")

    kind_raw = _get(parser, "game", "kind", str, required=True).strip().lower()
    try:
        kind = GameKind(kind_raw)
    except ValueError:
        raise ParseError(f"[game] kind = {kind_raw!r}: expected 'pd' or 'opd'") from None
    strict = _get(parser, "game", "strict", _as_bool, default=True)
    try:
        game = GameSpec(
            kind=kind,
            R=_get(parser, "game", "R", float, required=True),
            S=_get(parser, "game", "S", float, required=True),
            T=_get(parser, "game", "T", float, required=True),
            P=_get(parser, "game", "P", float, required=True),
            L=_get(parser, "game", "L", float) if kind is GameKind.OPD else None,
        )
        validate_spec(game, strict=strict)
    except (DomainError, OrderingViolation) as exc:
        raise ValidationError(f"[game]: {exc}") from None

    coupling = None
    if parser.has_section("environment"):
        try:
            coupling = EnvCoupling(
                lam=_get(parser, "environment", "lambda", float, required=True),
                epsilon=_get(parser, "environment", "epsilon", float, default=1.0),
            )
        except DomainError as exc:
            raise ValidationError(f"[environment]: {exc}") from None

    proto_raw = _get(parser, "scenario", "protocol", str, default="pairwise").strip().lower()
    if proto_raw not in _PROTOCOLS:
        raise ParseError(f"[scenario] protocol = {proto_raw!r}: expected one of {sorted(_PROTOCOLS)}")
    rule_raw = _get(parser, "scenario", "comparison_rule", str, default="fitness").strip().lower()
    if rule_raw not in _RULES:
        raise ParseError(f"[scenario] comparison_rule = {rule_raw!r}: expected 'fitness' or 'entrywise'")
    closed_form = _get(parser, "scenario", "closed_form", _as_bool, default=False)

    method_raw = _get(parser, "integrator", "method", str, default="rk45").strip().lower()
    try:
        method = Method(method_raw)
    except ValueError:
        raise ParseError(f"[integrator] method = {method_raw!r}: expected 'rk4' or 'rk45'") from None
    try:
        integrator = IntegratorConfig(
            method=method,
            step=_get(parser, "integrator", "step", float, default=1e-3),
            abs_tol=_get(parser, "integrator", "abs_tol", float, default=1e-8),
            rel_tol=_get(parser, "integrator", "rel_tol", float, default=1e-8),
            t_end=_get(parser, "integrator", "t_end", float,
                       default=30.0 if kind is GameKind.PD else 300.0),
            max_steps=_get(parser, "integrator", "max_steps", int, default=2_000_000),
        )
    except ValueError as exc:
        raise ValidationError(f"[integrator]: {exc}") from None

    ics: list[PopulationState] = []
    if parser.has_section("initial_conditions"):
        for key, raw in parser.items("initial_conditions"):
            parts = [p for p in raw.replace(",", " ").split() if p]
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise ParseError(f"[initial_conditions] {key} = {raw!r}: not numeric") from None
            want = game.n_strategies - 1
            if len(values) == want:
                values.append(1.0)  # no environment coordinate given
            if len(values) != want + 1:
                raise ParseError(
                    f"[initial_conditions] {key} = {raw!r}: expected {want} strategy "
                    "coordinates plus an optional environment level"
                )
            try:
                ics.append(PopulationState(x=tuple(values[:-1]), n=values[-1]))
            except DomainError as exc:
                raise ValidationError(f"[initial_conditions] {key}: {exc}") from None

    analyses = Analyses(
        fixed_points=_get(parser, "analyses", "fixed_points", _as_bool, default=True),
        jacobians=_get(parser, "analyses", "jacobians", _as_bool, default=True),
        oscillation=_get(parser, "analyses", "oscillation", _as_bool, default=True),
        phase_grid=_get(parser, "analyses", "phase_grid", int, default=0),
        oscillation_window=_get(parser, "analyses", "oscillation_window", float),
        search_resolution=_get(parser, "analyses", "search_resolution", int),
    )

    try:
        return Scenario(
            name=_get(parser, "scenario", "name", str, default=path.stem),
            game=game,
            coupling=coupling,
            protocols=_PROTOCOLS[proto_raw],
            comparison_rule=_RULES[rule_raw],
            initial_conditions=tuple(ics),
            integrator=integrator,
            analyses=analyses,
            closed_form=closed_form,
            strict=strict,
        )
    except ValidationError:
        raise
    except (DomainError, ValueError) as exc:
        raise ValidationError(str(exc)) from None


# --- export -----------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def export_trajectory(traj: Trajectory, fmt: str, path: str | os.PathLike) -> Path:
    """Write a trajectory as CSV (t, x1[, x2], n at full precision) or JSONL."""
    if len(traj) == 0:
        raise EmptyTrajectory("cannot export a trajectory without samples")
    fmt = fmt.lower()
    path = Path(path)
    if fmt == "csv":
        lines = ["t," + ",".join(traj.labels)]
        for ti, yi in zip(traj.t, traj.y):
            lines.append(",".join([_fmt(ti)] + [_fmt(v) for v in yi]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "jsonl":
        lines = []
        for ti, yi in zip(traj.t, traj.y):
            record = {"t": float(ti)}
            record.update({lbl: float(v) for lbl, v in zip(traj.labels, yi)})
            lines.append(json.dumps(record))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown export format {fmt!r}; use 'csv' or 'jsonl'")
    return path


def read_trajectory_jsonl(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Read back a JSONL trajectory as (t, y, labels)."""
    ts, rows, labels = [], [], None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if labels is None:
                labels = tuple(k for k in record if k != "t")
            ts.append(record["t"])
            rows.append([record[k] for k in labels])
    if labels is None:
        raise EmptyTrajectory(f"no samples in {path}")
    return np.asarray(ts), np.asarray(rows), labels


def export_phase_grid(pairs, labels, path: str | os.PathLike) -> Path:
    """Quiver-ready CSV: one row per lattice point, coordinates then derivatives."""
    path = Path(path)
    header = ",".join(labels) + "," + ",".join(f"d{lbl}" for lbl in labels)
    lines = [header]
    for point, deriv in pairs:
        lines.append(",".join([_fmt(v) for v in point] + [_fmt(v) for v in deriv]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# --- analysis + run ------------------------------------------------------------------

def _analysis_report(scenario: Scenario, protocol: Protocol) -> dict:
    """Catalog plus numerical search for one protocol of a scenario."""
    spec, coupling, rule = scenario.game, scenario.coupling, scenario.comparison_rule
    report: dict = {"protocol": protocol.value, "comparison_rule": rule.value, "notes": []}

    try:
        catalog = analysis.catalog_fixed_points(spec, coupling, protocol, rule)
        report["catalog"] = [r.to_dict() for r in catalog]
    except CatalogUnavailable as exc:
        catalog = []
        report["catalog"] = []
        report["notes"].append(str(exc))

    search_field = scenario_field(scenario, protocol)
    if search_field.dim == 1:
        domain = [(0.0, 1.0)]
    else:
        domain = [(0.0, 1.0)] * search_field.dim
    resolution = scenario.analyses.search_resolution or (9 if search_field.dim <= 2 else 6)
    found = find_fixed_points(search_field, domain, resolution)
    report["search"] = [r.to_dict() for r in found]

    if spec.kind is GameKind.PD and protocol is Protocol.PAIRWISE and coupling is None:
        report["notes"].append(pd_defection_rest_points(spec))
    if scenario.closed_form:
        report["notes"].append(
            "trajectories integrate the polynomial closed-form model; the clipped "
            "protocol field differs from it for n > 1/2 (prefactor x instead of 1 - x)"
        )
    return report


def _protocol_tag(protocol: Protocol) -> str:
    return "rd" if protocol is Protocol.REPLICATOR else "pcd"


def run(
    scenario: Scenario,
    out_dir: str | os.PathLike,
    *,
    figures: bool = True,
    fmt: str = "csv",
) -> dict:
    """Execute a scenario into ``out_dir`` and return the run summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log: list[str] = [f"scenario {scenario.name}"]
    summary: dict = {
        "scenario": scenario.name,
        "game": {
            "kind": scenario.game.kind.value,
            "R": scenario.game.R,
            "S": scenario.game.S,
            "T": scenario.game.T,
            "P": scenario.game.P,
            **({"L": scenario.game.L} if scenario.game.L is not None else {}),
        },
        "coupling": (
            {"lambda": scenario.coupling.lam, "epsilon": scenario.coupling.epsilon}
            if scenario.coupling
            else None
        ),
        "closed_form_model": scenario.closed_form,
        "trajectories": [],
        "files": [],
    }

    window = scenario.analyses.oscillation_window or scenario.integrator.t_end / 3.0
    trajectories: dict[str, list[Trajectory]] = {}
    for protocol in scenario.protocols:
        field = scenario_field(scenario, protocol)
        tag = _protocol_tag(protocol)
        trajectories[tag] = []
        for idx, ic in enumerate(scenario.initial_conditions, start=1):
            traj = integrate(field, ic, scenario.integrator)
            trajectories[tag].append(traj)
            fname = f"{scenario.name}_{tag}_ic{idx}.{fmt.lower()}"
            export_trajectory(traj, fmt, out / fname)
            summary["files"].append(fname)
            entry = {
                "protocol": protocol.value,
                "initial_condition": {**dict(zip(field.labels, ic.vector()))},
                "file": fname,
                "final_state": dict(zip(field.labels, map(float, traj.y[-1]))),
                "clamp_total": traj.total_clamp,
                "clamp_events": len(traj.events),
                "steps": len(traj) - 1,
            }
            if scenario.analyses.oscillation:
                try:
                    osc = detect_oscillation(traj, 0, window)
                    entry["oscillation"] = osc.to_dict()
                except analysis.InsufficientData as exc:
                    entry["oscillation"] = {"error": str(exc)}
            summary["trajectories"].append(entry)
            log.append(
                f"  {tag} ic{idx}: {len(traj) - 1} steps, final "
                + ", ".join(f"{k}={v:.6g}" for k, v in entry["final_state"].items())
            )

        if scenario.analyses.phase_grid:
            pairs = sample_phase_grid(field, scenario.analyses.phase_grid)
            gname = f"{scenario.name}_{tag}_phase_grid.csv"
            export_phase_grid(pairs, field.labels, out / gname)
            summary["files"].append(gname)

    if scenario.analyses.fixed_points:
        reports = {
            _protocol_tag(p): _analysis_report(scenario, p) for p in scenario.protocols
        }
        summary["fixed_points"] = reports
        fp_path = out / f"{scenario.name}_fixed_points.json"
        fp_path.write_text(json.dumps(reports, indent=2) + "\n", encoding="utf-8")
        summary["files"].append(fp_path.name)
        for tag, rep in reports.items():
            n_cat = len(rep.get("catalog", []))
            n_found = len(rep.get("search", []))
            log.append(f"  {tag}: catalog {n_cat} points, search found {n_found}")

    if figures and scenario.initial_conditions:
        from . import plots

        for protocol in scenario.protocols:
            tag = _protocol_tag(protocol)
            field = scenario_field(scenario, protocol)
            ts_name = f"{scenario.name}_{tag}_timeseries.png"
            plots.time_series_figure(trajectories[tag], field.labels, out / ts_name,
                                     title=f"{scenario.name} ({tag})")
            summary["files"].append(ts_name)
            if scenario.coupling is not None:
                ph_name = f"{scenario.name}_{tag}_phase.png"
                grid_res = scenario.analyses.phase_grid or 12
                pairs = sample_phase_grid(field, min(grid_res, 12))
                plots.phase_portrait_figure(
                    pairs, trajectories[tag], field.labels, out / ph_name,
                    title=f"{scenario.name} ({tag})",
                )
                summary["files"].append(ph_name)

    summary["files"].sort()
    (out / f"{scenario.name}_summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    log.append(f"wrote {len(summary['files']) + 2} files")
    (out / f"{scenario.name}_run.log").write_text("\n".join(log) + "\n", encoding="utf-8")
    return summary
