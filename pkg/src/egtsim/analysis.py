"""Fixed points, Jacobians, stability classes and oscillation detection.

Fixed points come from two routes that cross-validate each other: a
closed-form catalog of the known rest points of each system, and a
damped-Newton search seeded on a grid.  Jacobians likewise come in an
analytic mode (hand-derived formulas attached to smooth fields) and a
finite-difference mode that works on any field, switching to one-sided
differences on the kinks of the clipped pairwise rates.

The catalog for the coupled two-strategy pairwise system is stated, and
classified, for the smooth quadratic model of that system in the
epsilon = 1 time normalization (rest points and stability classes are
invariant under the time rescaling; eigenvalues scale).  Catalog points
that are not rest points of the clipped protocol field carry a note
saying so, with the protocol residual, rather than being dropped.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dataclass_field
from enum import Enum

import numpy as np

from .dynamics import (
    ClosedForm,
    ComparisonRule,
    Field,
    Protocol,
    make_closed_form_field,
    make_pairwise_field,
    make_replicator_field,
)
from .games import EnvCoupling, GameKind, GameSpec
from .integrate import Trajectory

__all__ = [
    "Stability",
    "Provenance",
    "JacobianMode",
    "FixedPointReport",
    "OscillationReport",
    "AmplitudeTrend",
    "AnalyticUnavailable",
    "CatalogUnavailable",
    "InsufficientData",
    "eigenvalues",
    "classify",
    "fd_jacobian",
    "jacobian",
    "find_fixed_points",
    "catalog_fixed_points",
    "detect_oscillation",
    "pd_defection_rest_points",
    "RESIDUAL_TOL",
]

RESIDUAL_TOL = 1e-9
DEDUP_TOL = 1e-6
KINK_TOL = 1e-9
FD_STEP = 1e-6

#: classification tolerances per Jacobian mode
RE_TOL = {"analytic": 1e-8, "fd": 1e-5}
IM_TOL = {"analytic": 1e-8, "fd": 1e-5}


class Stability(Enum):
    ASYMPTOTICALLY_STABLE = "asymptotically_stable"
    UNSTABLE = "unstable"
    SADDLE = "saddle"
    NEUTRAL_CENTER = "neutral_center"
    MARGINAL = "marginal"
    UNDETERMINED = "undetermined"


class Provenance(Enum):
    CATALOG = "catalog"
    NUMERICAL_SEARCH = "numerical_search"


class JacobianMode(Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "fd"


class AmplitudeTrend(Enum):
    SUSTAINED = "sustained"
    DECAYING = "decaying"
    GROWING = "growing"


class AnalyticUnavailable(LookupError):
    """No analytic Jacobian is attached to this field."""


class CatalogUnavailable(LookupError):
    """No closed-form fixed-point catalog exists for this system."""


class InsufficientData(ValueError):
    """Trajectory too short for the requested analysis window."""


@dataclass(frozen=True)
class FixedPointReport:
    point: tuple[float, ...]
    labels: tuple[str, ...]
    residual: float
    provenance: Provenance
    in_domain: bool
    rejected: bool = False
    on_kink: bool = False
    jacobian: np.ndarray | None = None
    jacobian_mode: JacobianMode | None = None
    eigenvalues: tuple[complex, ...] | None = None
    stability: Stability | None = None
    saddle: bool = False
    protocol_residual: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {
            "point": dict(zip(self.labels, self.point)),
            "residual": self.residual,
            "provenance": self.provenance.value,
            "in_domain": self.in_domain,
            "rejected": self.rejected,
            "on_kink": self.on_kink,
        }
        if self.jacobian is not None:
            d["jacobian"] = [list(map(float, row)) for row in self.jacobian]
            d["jacobian_mode"] = self.jacobian_mode.value
            d["eigenvalues"] = [[z.real, z.imag] for z in self.eigenvalues]
            d["stability"] = self.stability.value
            d["saddle"] = self.saddle
        if self.protocol_residual is not None:
            d["protocol_residual"] = self.protocol_residual
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class OscillationReport:
    oscillating: bool
    extrema_count: int
    estimated_period: float | None = None
    amplitude_trend: AmplitudeTrend | None = None
    mean_amplitude: float | None = None
    drift_per_period: float | None = None

    def to_dict(self) -> dict:
        return {
            "oscillating": self.oscillating,
            "extrema_count": self.extrema_count,
            "estimated_period": self.estimated_period,
            "amplitude_trend": self.amplitude_trend.value if self.amplitude_trend else None,
            "mean_amplitude": self.mean_amplitude,
            "drift_per_period": self.drift_per_period,
        }


# --- eigenvalues and classification -----------------------------------------

def eigenvalues(matrix: np.ndarray) -> tuple[complex, ...]:
    """Eigenvalues, with triangular matrices short-circuited to their diagonal
    so that diagonal Jacobians classify exactly."""
    m = np.asarray(matrix, dtype=float)
    lower = np.tril(m, -1)
    upper = np.triu(m, 1)
    if not lower.any() or not upper.any():
        return tuple(complex(v) for v in np.diag(m))
    return tuple(complex(z) for z in np.linalg.eigvals(m))


def classify(
    eigs,
    mode: JacobianMode = JacobianMode.ANALYTIC,
    re_tol: float | None = None,
    im_tol: float | None = None,
) -> tuple[Stability, bool]:
    """Stability class from eigenvalues, plus a saddle flag.

    Mixed-sign spectra are reported as UNSTABLE with the saddle flag set.
    NEUTRAL_CENTER requires every real part below tolerance and at least
    one genuinely imaginary pair; MARGINAL requires a near-zero
    eigenvalue with nothing unstable.
    """
    re_tol = RE_TOL[mode.value] if re_tol is None else re_tol
    im_tol = IM_TOL[mode.value] if im_tol is None else im_tol
    eigs = [complex(z) for z in eigs]
    res = [z.real for z in eigs]
    if all(abs(re) <= re_tol for re in res):
        if any(abs(z.imag) > im_tol for z in eigs):
            return Stability.NEUTRAL_CENTER, False
        return Stability.MARGINAL, False
    if all(re < -re_tol for re in res):
        return Stability.ASYMPTOTICALLY_STABLE, False
    if any(re > re_tol for re in res):
        saddle = any(re < -re_tol for re in res)
        return Stability.UNSTABLE, saddle
    if any(abs(z.real) <= re_tol and abs(z.imag) <= im_tol for z in eigs):
        return Stability.MARGINAL, False
    return Stability.UNDETERMINED, False


# --- Jacobians ---------------------------------------------------------------

def fd_jacobian(
    field: Field,
    point,
    step: float = FD_STEP,
    kink_tol: float = KINK_TOL,
) -> tuple[np.ndarray, bool]:
    """Finite-difference Jacobian, central by default.

    When the point sits within ``kink_tol`` of a clipped-rate kink the
    differences switch to second-order one-sided, taken on whichever
    side keeps the largest kink margin, and the on-kink flag is set.
    """
    y = np.asarray(point, dtype=float)
    margin = field.kink_margin(y) if field.kink_margin is not None else math.inf
    on_kink = margin < kink_tol
    dim = field.dim
    jac = np.empty((dim, dim))
    if not on_kink:
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = step
            jac[:, j] = (field(y + e) - field(y - e)) / (2.0 * step)
        return jac, False
    f0 = field(y)
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = step
        plus = field.kink_margin(y + e)
        minus = field.kink_margin(y - e)
        sgn = 1.0 if plus > minus else -1.0
        f1 = field(y + sgn * e)
        f2 = field(y + 2.0 * sgn * e)
        jac[:, j] = sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step)
    return jac, True


def jacobian(field: Field, point, mode: JacobianMode = JacobianMode.FINITE_DIFFERENCE) -> np.ndarray:
    """Jacobian of ``field`` at ``point`` in the requested mode."""
    y = np.asarray(point, dtype=float)
    if mode is JacobianMode.ANALYTIC:
        if field.analytic_jacobian is None:
            raise AnalyticUnavailable(f"no analytic Jacobian for field {field.description!r}")
        return field.analytic_jacobian(y)
    jac, _ = fd_jacobian(field, y)
    return jac


# --- numerical search ---------------------------------------------------------

def _natural_domain_ok(point: np.ndarray, field: Field, tol: float = 1e-9) -> bool:
    """Inside the unit box (and the simplex for three-strategy systems)."""
    if np.any(point < -tol) or np.any(point > 1.0 + tol):
        return False
    if field.simplex and point[0] + point[1] > 1.0 + tol:
        return False
    return True


def _newton(field: Field, seed: np.ndarray, box_lo, box_hi, max_iter: int = 100):
    # Push well below the reporting tolerance: at a degenerate (quadratic)
    # zero Newton converges only linearly, and stopping at 1e-9 would leave
    # a plateau of pseudo-roots around each such point.
    target = 1e-13
    y = seed.astype(float).copy()
    fy = field(y)
    fn = float(np.max(np.abs(fy)))
    lo = box_lo - 0.5
    hi = box_hi + 0.5
    for _ in range(max_iter):
        if fn < target:
            break
        jac, _ = fd_jacobian(field, y)
        try:
            delta = np.linalg.solve(jac, -fy)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, -fy, rcond=None)[0]
        if not np.all(np.isfinite(delta)):
            return None
        alpha = 1.0
        improved = False
        while alpha >= 1.0 / 4096.0:
            y_try = np.clip(y + alpha * delta, lo, hi)
            f_try = field(y_try)
            f_try_n = float(np.max(np.abs(f_try)))
            if f_try_n < fn * (1.0 - 1e-4 * alpha) or f_try_n < target:
                y, fy, fn = y_try, f_try, f_try_n
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
    if fn < RESIDUAL_TOL:
        return y
    return None


def find_fixed_points(
    field: Field,
    domain,
    resolution: int = 6,
    dedup_tol: float = DEDUP_TOL,
) -> list[FixedPointReport]:
    """Damped-Newton search from a lattice of seeds over ``domain``.

    ``domain`` is one (lo, hi) interval per coordinate.  Converged roots
    (residual below 1e-9) are deduplicated within ``dedup_tol`` in the
    max norm, and only roots inside the search box are kept; the
    in_domain flag still refers to the natural domain (unit box and, for
    three-strategy systems, the simplex).  Seeds that fail to converge
    are discarded silently.
    """
    domain = [(float(lo), float(hi)) for lo, hi in domain]
    if len(domain) != field.dim:
        raise ValueError(f"need {field.dim} intervals, got {len(domain)}")
    if resolution < 4:
        raise ValueError("seed grid resolution must be at least 4 per axis")
    box_lo = np.array([lo for lo, _ in domain])
    box_hi = np.array([hi for _, hi in domain])
    axes = [np.linspace(lo, hi, resolution) for lo, hi in domain]
    roots: list[np.ndarray] = []
    for seed in itertools.product(*axes):
        seed = np.asarray(seed)
        if field.simplex and seed[0] + seed[1] > 1.0 + 1e-12:
            continue
        y = _newton(field, seed, box_lo, box_hi)
        if y is None:
            continue
        if np.any(y < box_lo - 1e-6) or np.any(y > box_hi + 1e-6):
            continue
        if any(float(np.max(np.abs(y - r))) < dedup_tol for r in roots):
            continue
        roots.append(y)
    roots.sort(key=lambda r: tuple(r))
    reports = []
    for y in roots:
        jac, on_kink = fd_jacobian(field, y)
        eigs = eigenvalues(jac)
        stability, saddle = classify(eigs, JacobianMode.FINITE_DIFFERENCE)
        reports.append(
            FixedPointReport(
                point=tuple(float(v) for v in y),
                labels=field.labels,
                residual=float(np.max(np.abs(field(y)))),
                provenance=Provenance.NUMERICAL_SEARCH,
                in_domain=_natural_domain_ok(y, field),
                on_kink=on_kink,
                jacobian=jac,
                jacobian_mode=JacobianMode.FINITE_DIFFERENCE,
                eigenvalues=eigs,
                stability=stability,
                saddle=saddle,
            )
        )
    return reports


# --- closed-form catalogs ------------------------------------------------------

def _report_catalog_point(
    point,
    system_field: Field,
    note: str = "",
    protocol_field: Field | None = None,
    jacobian_field: Field | None = None,
) -> FixedPointReport:
    y = np.asarray(point, dtype=float)
    residual = float(np.max(np.abs(system_field(y))))
    rejected = residual > RESIDUAL_TOL
    protocol_residual = None
    if protocol_field is not None:
        protocol_residual = float(np.max(np.abs(protocol_field(y))))
        if protocol_residual > RESIDUAL_TOL and not rejected:
            extra = (
                "not stationary under the clipped pairwise protocol "
                f"(protocol residual {protocol_residual:.3e}); rest point of the "
                "smooth quadratic model only"
            )
            note = f"{note}; {extra}" if note else extra
    jfield = jacobian_field or system_field
    jac = None
    mode = None
    eigs = None
    stability = None
    saddle = False
    on_kink = False
    if not rejected:
        if jfield.analytic_jacobian is not None:
            jac = jfield.analytic_jacobian(y)
            mode = JacobianMode.ANALYTIC
        else:
            jac, on_kink = fd_jacobian(jfield, y)
            mode = JacobianMode.FINITE_DIFFERENCE
        eigs = eigenvalues(jac)
        stability, saddle = classify(eigs, mode)
    else:
        note_r = f"residual {residual:.3e} exceeds {RESIDUAL_TOL}; rejected"
        note = f"{note}; {note_r}" if note else note_r
    return FixedPointReport(
        point=tuple(float(v) for v in y),
        labels=system_field.labels,
        residual=residual,
        provenance=Provenance.CATALOG,
        in_domain=_natural_domain_ok(y, system_field),
        rejected=rejected,
        on_kink=on_kink,
        jacobian=jac,
        jacobian_mode=mode,
        eigenvalues=eigs,
        stability=stability,
        saddle=saddle,
        protocol_residual=protocol_residual,
        note=note,
    )


def analysis_field(
    spec: GameSpec,
    coupling: EnvCoupling | None,
    protocol: Protocol,
    rule: ComparisonRule = ComparisonRule.FITNESS_DIFFERENCE,
) -> Field:
    """The field the closed-form catalog of a system refers to.

    For the coupled two-strategy pairwise system this is the smooth
    quadratic model in the epsilon = 1 normalization; everywhere else it
    is the protocol field itself.
    """
    if spec.kind is GameKind.PD and protocol is Protocol.PAIRWISE:
        if coupling is None:
            return make_closed_form_field(ClosedForm.PAIRWISE_PD, spec, None, include_env=False)
        unit = EnvCoupling(lam=coupling.lam, epsilon=1.0)
        return make_closed_form_field(ClosedForm.PAIRWISE_PD_FEEDBACK, spec, unit)
    if spec.kind is GameKind.PD and protocol is Protocol.REPLICATOR and coupling is None:
        return make_closed_form_field(ClosedForm.REPLICATOR_PD, spec, None, include_env=False)
    if protocol is Protocol.REPLICATOR:
        return make_replicator_field(spec, coupling)
    return make_pairwise_field(spec, coupling, rule)


def catalog_fixed_points(
    spec: GameSpec,
    coupling: EnvCoupling | None,
    protocol: Protocol,
    rule: ComparisonRule = ComparisonRule.FITNESS_DIFFERENCE,
) -> list[FixedPointReport]:
    """Instantiate the known closed-form rest points of the selected system.

    Every candidate is evaluated against the actual field it belongs to;
    candidates whose residual exceeds 1e-9 are reported as rejected, not
    dropped.  Points outside the unit box/simplex are flagged rather
    than removed.
    """
    d_tr, d_ps = spec.delta_tr, spec.delta_ps
    lam = coupling.lam if coupling is not None else None
    sysf = analysis_field(spec, coupling, protocol, rule)

    if spec.kind is GameKind.PD and protocol is Protocol.PAIRWISE:
        protof = (
            make_pairwise_field(spec, EnvCoupling(lam=coupling.lam, epsilon=1.0), rule)
            if coupling is not None
            else make_pairwise_field(spec, None, rule, include_env=False)
        )
        entries: list[tuple[tuple, str]] = []
        if coupling is None:
            entries.append(((0.0,), "all defect"))
            if d_ps != d_tr:
                entries.append(((d_ps / (d_ps - d_tr),), "payoff-balance point"))
        else:
            entries += [
                ((1.0, 0.0), "all cooperate, depleted environment"),
                ((1.0, 1.0), "all cooperate, replete environment"),
            ]
            if d_ps != d_tr:
                xbar = d_ps / (d_ps - d_tr)
                entries += [
                    ((xbar, 0.0), "payoff-balance point, depleted environment"),
                    ((xbar, 1.0), "payoff-balance point, replete environment"),
                ]
            entries.append(((1.0 / (lam + 1.0), 0.5), "interior point, half-depleted environment"))
        return [_report_catalog_point(p, sysf, note, protocol_field=protof) for p, note in entries]

    if spec.kind is GameKind.PD and protocol is Protocol.REPLICATOR:
        if coupling is None:
            entries = [((0.0,), "all defect"), ((1.0,), "all cooperate")]
            if d_ps != d_tr:
                entries.append(((d_ps / (d_ps - d_tr),), "payoff-balance point"))
        else:
            entries = [
                ((0.0, 0.0), "all defect, depleted"),
                ((0.0, 1.0), "all defect, replete"),
                ((1.0, 0.0), "all cooperate, depleted"),
                ((1.0, 1.0), "all cooperate, replete"),
            ]
            if d_ps != d_tr:
                xbar = d_ps / (d_ps - d_tr)
                entries += [
                    ((xbar, 0.0), "payoff-balance point, depleted"),
                    ((xbar, 1.0), "payoff-balance point, replete"),
                ]
            entries.append(((1.0 / (lam + 1.0), 0.5), "interior point, half-depleted environment"))
        return [_report_catalog_point(p, sysf, note) for p, note in entries]

    if spec.kind is GameKind.OPD and coupling is not None:
        R, S, T, P, L = spec.R, spec.S, spec.T, spec.P, spec.L
        x_int = 1.0 / (1.0 + lam)
        entries = [
            ((0.0, 0.0, 0.0), "all abstain, depleted"),
            ((1.0, 0.0, 0.0), "all cooperate, depleted"),
            ((0.0, 1.0, 0.0), "all defect, depleted"),
            ((0.0, 0.0, 1.0), "all abstain, replete"),
            ((1.0, 0.0, 1.0), "all cooperate, replete"),
            ((0.0, 1.0, 1.0), "all defect, replete"),
        ]
        if d_ps != d_tr:
            xbar = d_ps / (d_ps - d_tr)
            entries += [
                ((xbar, -d_tr / (d_ps - d_tr), 0.0), "payoff-balance point, no abstainers, depleted"),
                ((xbar, -d_tr / (d_ps - d_tr), 1.0), "payoff-balance point, no abstainers, replete"),
            ]
        entries.append(((x_int, lam / (1.0 + lam), 0.5), "half-depleted point without abstainers"))
        if P - 2.0 * L + S != 0.0:
            x2_all_equal = -(R - 2.0 * L + T) / ((P - 2.0 * L + S) * (1.0 + lam))
            entries.append(
                ((x_int, x2_all_equal, 0.5), "interior point where every payoff equals the loner payoff")
            )
        if R != T:
            entries.append(((x_int, 0.0, (L - T) / (R - T)), "no defectors"))
        return [_report_catalog_point(p, sysf, note) for p, note in entries]

    raise CatalogUnavailable(
        f"no closed-form catalog for kind={spec.kind.value}, protocol={protocol.value}, "
        f"coupling={'on' if coupling else 'off'}"
    )


def pd_defection_rest_points(spec: GameSpec) -> dict:
    """Settle which closed form gives the nonzero rest point of the
    uncoupled two-strategy pairwise field.

    Two algebraically inequivalent expressions circulate for that point:
    delta_PS / (delta_PS - delta_TR) and 1 - delta_PS / delta_TR.  Both
    are evaluated against the protocol field; the report records which
    one is actually a root.
    """
    field = make_pairwise_field(spec, None, include_env=False)
    d_tr, d_ps = spec.delta_tr, spec.delta_ps
    out = {"candidates": []}
    candidates = []
    if d_ps != d_tr:
        candidates.append(("delta_PS/(delta_PS - delta_TR)", d_ps / (d_ps - d_tr)))
    if d_tr != 0.0:
        candidates.append(("1 - delta_PS/delta_TR", 1.0 - d_ps / d_tr))
    matching = None
    for label, value in candidates:
        residual = float(abs(field(np.array([value]))[0]))
        is_root = residual < RESIDUAL_TOL
        out["candidates"].append(
            {"expression": label, "value": value, "residual": residual, "is_rest_point": is_root}
        )
        if is_root and matching is None:
            matching = label
    out["matching_expression"] = matching
    return out


# --- oscillation detection ------------------------------------------------------

def _refine_extremum(t: np.ndarray, v: np.ndarray, idx: int) -> tuple[float, float]:
    """Parabola through the extremum sample and its neighbours.

    Sampled peak heights jitter by O(dt^2); the parabola vertex removes
    that, which matters when judging whether an amplitude drifts.
    Degenerate neighbourhoods (flat or at the window edge) fall back to
    the raw sample.
    """
    if idx <= 0 or idx >= len(t) - 1:
        return float(t[idx]), float(v[idx])
    t0, t1, t2 = float(t[idx - 1]), float(t[idx]), float(t[idx + 1])
    v0, v1, v2 = float(v[idx - 1]), float(v[idx]), float(v[idx + 1])
    coeffs = np.polyfit([t0, t1, t2], [v0, v1, v2], 2)
    a, b = float(coeffs[0]), float(coeffs[1])
    if a == 0.0:
        return t1, v1
    t_star = -b / (2.0 * a)
    if not (t0 <= t_star <= t2):
        return t1, v1
    v_star = float(np.polyval(coeffs, t_star))
    return t_star, v_star


def _hysteresis_extrema(t: np.ndarray, v: np.ndarray, delta: float):
    """Alternating maxima/minima via hysteresis: an extremum counts once the
    series has moved away from it by at least ``delta``.  Extrema are
    refined through a local parabola before being reported.

    The first registered extremum is discarded: it is the running
    extremum since the window boundary, usually not a local extremum at
    all, and one outlier is enough to corrupt the amplitude-trend fit.
    """
    maxima: list[tuple[float, float]] = []
    minima: list[tuple[float, float]] = []
    first_was_max: bool | None = None
    mn, mx = math.inf, -math.inf
    mn_i = mx_i = 0
    look_for_max = None
    for i, vi in enumerate(v):
        if vi > mx:
            mx, mx_i = vi, i
        if vi < mn:
            mn, mn_i = vi, i
        if look_for_max is not False and vi < mx - delta:
            maxima.append(_refine_extremum(t, v, mx_i))
            if first_was_max is None:
                first_was_max = True
            mn, mn_i = vi, i
            look_for_max = False
        elif look_for_max is not True and vi > mn + delta:
            minima.append(_refine_extremum(t, v, mn_i))
            if first_was_max is None:
                first_was_max = False
            mx, mx_i = vi, i
            look_for_max = True
    if first_was_max is True:
        maxima.pop(0)
    elif first_was_max is False:
        minima.pop(0)
    return maxima, minima


def detect_oscillation(
    traj: Trajectory,
    component: int | str,
    window: float,
    min_prominence: float = 1e-6,
) -> OscillationReport:
    """Oscillation verdict for one component over the trailing ``window``.

    Counts alternating extrema with prominence at least
    ``min_prominence``, estimates the period from the mean spacing of
    same-type extrema, and fits a line through the peak (and trough)
    values: the amplitude trend is SUSTAINED when both slopes satisfy
    |slope| * window < 1% of the mean amplitude, otherwise DECAYING or
    GROWING by the sign of the amplitude drift.  ``oscillating`` is true
    only for a sustained oscillation with at least four extrema in the
    window.
    """
    if isinstance(component, str):
        series = traj.component(component)
    else:
        series = traj.y[:, component]
    span = float(traj.t[-1] - traj.t[0])
    if span < 2.0 * window:
        raise InsufficientData(
            f"trajectory span {span} shorter than twice the window {window}"
        )
    t_lo = traj.t[-1] - window
    mask = traj.t >= t_lo
    tt = traj.t[mask]
    vv = series[mask]
    maxima, minima = _hysteresis_extrema(tt, vv, min_prominence)
    count = len(maxima) + len(minima)
    if count == 0:
        return OscillationReport(oscillating=False, extrema_count=0)

    period = None
    spacings = []
    for group in (maxima, minima):
        if len(group) >= 2:
            times = np.array([p[0] for p in group])
            spacings.extend(np.diff(times).tolist())
    if spacings:
        period = float(np.mean(spacings))

    amplitude = None
    trend = None
    drift_per_period = None
    if maxima and minima:
        peak_mean = float(np.mean([p[1] for p in maxima]))
        trough_mean = float(np.mean([p[1] for p in minima]))
        amplitude = 0.5 * (peak_mean - trough_mean)
        slopes = []
        for group in (maxima, minima):
            if len(group) >= 2:
                times = np.array([p[0] for p in group])
                values = np.array([p[1] for p in group])
                slopes.append(float(np.polyfit(times, values, 1)[0]))
        if slopes and amplitude > 0:
            worst = max(abs(s) for s in slopes)
            if worst * window < 0.01 * amplitude:
                trend = AmplitudeTrend.SUSTAINED
            else:
                slope_max = slopes[0]
                slope_min = slopes[1] if len(slopes) > 1 else -slopes[0]
                drift = 0.5 * (slope_max - slope_min)
                trend = AmplitudeTrend.GROWING if drift > 0 else AmplitudeTrend.DECAYING
            if period is not None:
                slope_max = slopes[0]
                slope_min = slopes[1] if len(slopes) > 1 else -slopes[0]
                drift = 0.5 * (slope_max - slope_min)
                drift_per_period = abs(drift) * period / amplitude

    oscillating = (
        count >= 4
        and trend is AmplitudeTrend.SUSTAINED
        and amplitude is not None
        and amplitude >= min_prominence
    )
    return OscillationReport(
        oscillating=oscillating,
        extrema_count=count,
        estimated_period=period,
        amplitude_trend=trend,
        mean_amplitude=amplitude,
        drift_per_period=drift_per_period,
    )
