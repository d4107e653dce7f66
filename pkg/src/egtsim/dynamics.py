"""Right-hand sides of the coupled strategy/environment dynamics.

Two revision protocols are implemented over the same payoff structure:

* replicator dynamics, where a strategy grows at its fitness advantage
  over the population mean, and
* pairwise comparison dynamics, where players switch toward a strategy
  at a rate equal to the clipped payoff gain ``[z]_+ = max(z, 0)``
  (unfavourable switches get weight zero, which makes these fields
  continuous but only piecewise differentiable).

Each protocol optionally couples to an environmental level n through
the interpolated matrix A(n) and the logistic resource equation

    dn/dt = n (1 - n) ((1 + lambda) x1 - 1).

With coupling, the strategy equations are divided by the time-scale
factor epsilon; the environment equation never is.

The module also evaluates the polynomial closed forms of these systems
(:class:`ClosedForm`), kept deliberately literal so they can serve as
independent cross-checks of the protocol-derived fields.  Where a
closed form and its protocol field disagree (the clipped comparison
rate switches branch at n = 1/2), the disagreement is a property of the
models and is surfaced by callers, never hidden here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .games import (
    DomainError,
    EnvCoupling,
    GameKind,
    GameSpec,
    SIMPLEX_TOL,
    matrix_entries_at,
)

__all__ = [
    "Protocol",
    "ComparisonRule",
    "ClosedForm",
    "PopulationState",
    "DynamicsConfig",
    "Field",
    "FormMismatch",
    "make_replicator_field",
    "make_pairwise_field",
    "make_closed_form_field",
    "make_field",
    "replicator_field",
    "pairwise_field",
    "closed_form_field",
    "pairwise_flux",
    "replicator_flux",
]


class Protocol(Enum):
    REPLICATOR = "replicator"
    PAIRWISE = "pairwise"


class ComparisonRule(Enum):
    """Reading of the pairwise switch rate.

    FITNESS_DIFFERENCE clips the fitness gap as a whole,
    ``phi_ij = [r_j - r_i]_+``.  ENTRYWISE clips each payoff-entry gap
    before averaging, ``phi_ij = sum_k [a_jk - a_ik]_+ x_k``.  The two
    coincide for the two-strategy game, where all entry gaps share one
    sign, but differ for the optional game.
    """

    FITNESS_DIFFERENCE = "fitness"
    ENTRYWISE = "entrywise"


class ClosedForm(Enum):
    """Literal polynomial forms of the reduced systems, for cross-checking."""

    REPLICATOR_PD = "replicator_pd"
    PAIRWISE_PD = "pairwise_pd"
    PAIRWISE_PD_FEEDBACK = "pairwise_pd_feedback"
    REPLICATOR_OPD_FEEDBACK = "replicator_opd_feedback"
    PAIRWISE_OPD_FEEDBACK = "pairwise_opd_feedback"


class FormMismatch(ValueError):
    """Closed form requested for an incompatible game kind or coupling mode."""


@dataclass(frozen=True)
class PopulationState:
    """Strategy frequencies plus environmental level at one instant.

    ``x`` holds the cooperator fraction for the two-strategy game, or
    (cooperators, defectors) for the optional game with the abstainer
    fraction implicit as 1 - x1 - x2.
    """

    x: tuple[float, ...]
    n: float
    t: float = 0.0

    def __post_init__(self) -> None:
        x = tuple(float(v) for v in self.x)
        object.__setattr__(self, "x", x)
        if len(x) not in (1, 2):
            raise DomainError(f"state carries {len(x)} strategy coordinates, expected 1 or 2")
        for i, v in enumerate(x, start=1):
            if not (-SIMPLEX_TOL <= v <= 1.0 + SIMPLEX_TOL):
                raise DomainError(f"x{i} = {v!r} outside [0, 1]")
        if len(x) == 2 and x[0] + x[1] > 1.0 + SIMPLEX_TOL:
            raise DomainError(
                f"x1 + x2 = {x[0] + x[1]!r} exceeds 1: frequencies must stay on the simplex"
            )
        if not (-SIMPLEX_TOL <= self.n <= 1.0 + SIMPLEX_TOL):
            raise DomainError(f"n = {self.n!r} outside [0, 1]")
        if not math.isfinite(self.t):
            raise DomainError("t must be finite")

    def vector(self) -> np.ndarray:
        return np.array([*self.x, self.n], dtype=float)

    @classmethod
    def from_vector(cls, y, t: float = 0.0) -> "PopulationState":
        y = np.asarray(y, dtype=float)
        return cls(x=tuple(y[:-1]), n=float(y[-1]), t=t)


@dataclass(frozen=True)
class DynamicsConfig:
    """Which dynamical system a scenario runs."""

    protocol: Protocol
    feedback: bool = False
    comparison_rule: ComparisonRule = ComparisonRule.FITNESS_DIFFERENCE


@dataclass(frozen=True)
class Field:
    """Autonomous right-hand side over state vectors.

    State layout is ``[x1, (x2,) n]``, or just the strategy coordinates
    when the field was built without the environment slot (used for
    root-finding on the strategy axis alone).  ``kink_margin`` returns
    the smallest absolute value of any clipped argument at a state,
    zero margin meaning the state sits on a non-differentiable kink;
    it is None for smooth fields.

    ``support_preserving`` marks imitative dynamics (replicator), for
    which an initially absent strategy stays absent for the exact flow;
    the integrator uses it to hold that invariant against round-off.
    Innovative dynamics (pairwise comparison) repopulate absent
    strategies and must not be flagged.
    """

    rhs: Callable[[np.ndarray], np.ndarray]
    dim: int
    labels: tuple[str, ...]
    simplex: bool = False
    analytic_jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    kink_margin: Callable[[np.ndarray], float] | None = None
    support_preserving: bool = False
    description: str = ""

    def __call__(self, y) -> np.ndarray:
        return self.rhs(np.asarray(y, dtype=float))


def _frequencies(kind: GameKind, y: np.ndarray, has_env: bool) -> np.ndarray:
    if kind is GameKind.PD:
        x1 = y[0]
        return np.array([x1, 1.0 - x1])
    x1, x2 = y[0], y[1]
    return np.array([x1, x2, 1.0 - x1 - x2])


def replicator_flux(entries: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Full-simplex replicator derivative f_i (r_i - rbar); sums to zero."""
    r = entries @ freqs
    rbar = float(r @ freqs)
    return freqs * (r - rbar)


def pairwise_flux(
    entries: np.ndarray, freqs: np.ndarray, rule: ComparisonRule
) -> np.ndarray:
    """Full-simplex pairwise-comparison derivative (inflow minus outflow).

    Under either comparison rule the inflow and outflow double sums are
    identical term sets, so the components sum to zero.
    """
    k = len(freqs)
    r = entries @ freqs
    phi = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            if rule is ComparisonRule.FITNESS_DIFFERENCE:
                phi[i, j] = max(r[j] - r[i], 0.0)
            else:
                gaps = entries[j] - entries[i]
                phi[i, j] = float(np.maximum(gaps, 0.0) @ freqs)
    inflow = phi.T @ freqs
    outflow = freqs * phi.sum(axis=1)
    return inflow - outflow


def _env_rate(n: float, x1: float, lam: float) -> float:
    return n * (1.0 - n) * ((1.0 + lam) * x1 - 1.0)


def _kink_margin_fn(spec: GameSpec, coupling: EnvCoupling | None, rule: ComparisonRule):
    """Smallest |clipped argument| over all switch rates at a state."""
    k = spec.n_strategies

    def margin(y: np.ndarray) -> float:
        n = float(y[-1]) if coupling is not None else 1.0
        entries = matrix_entries_at(spec, n)
        freqs = _frequencies(spec.kind, y, coupling is not None)
        if rule is ComparisonRule.FITNESS_DIFFERENCE:
            r = entries @ freqs
            return float(min(abs(r[i] - r[j]) for i in range(k) for j in range(i + 1, k)))
        gaps = [
            abs(entries[j, c] - entries[i, c])
            for i in range(k)
            for j in range(k)
            if i != j
            for c in range(k)
        ]
        return float(min(gaps))

    return margin


def _labels(kind: GameKind, include_env: bool) -> tuple[str, ...]:
    strat = ("x1",) if kind is GameKind.PD else ("x1", "x2")
    return strat + ("n",) if include_env else strat


def make_replicator_field(
    spec: GameSpec,
    coupling: EnvCoupling | None,
    include_env: bool = True,
) -> Field:
    """Replicator dynamics; matrix at the state's n with coupling, at n = 1 without."""
    kind = spec.kind
    eps = coupling.epsilon if coupling else 1.0
    lam = coupling.lam if coupling else 0.0
    feedback = coupling is not None
    if feedback and not include_env:
        raise DomainError("a coupled field needs the environment coordinate")
    d_tr, d_ps = spec.delta_tr, spec.delta_ps
    nominal = matrix_entries_at(spec, 1.0)
    n_strat = spec.n_strategies - 1
    dim = n_strat + (1 if include_env else 0)

    if kind is GameKind.PD:

        def rhs(y: np.ndarray) -> np.ndarray:
            x = float(y[0])
            n = float(y[-1]) if feedback else 1.0
            c = d_tr * x + d_ps * (1.0 - x)
            gap = (1.0 - 2.0 * n) * c  # r1 - r2 for A(n)
            dx = x * (1.0 - x) * gap / eps
            if not include_env:
                return np.array([dx])
            dn = _env_rate(n, x, lam) if feedback else 0.0
            return np.array([dx, dn])

        def jac(y: np.ndarray) -> np.ndarray:
            x = float(y[0])
            n = float(y[-1]) if feedback else 1.0
            c = d_ps + (d_tr - d_ps) * x
            j11 = (1.0 - 2.0 * n) * ((1.0 - 2.0 * x) * c + x * (1.0 - x) * (d_tr - d_ps)) / eps
            if not include_env:
                return np.array([[j11]])
            if not feedback:
                return np.array([[j11, 0.0], [0.0, 0.0]])
            j12 = -2.0 * x * (1.0 - x) * c / eps
            j21 = n * (1.0 - n) * (1.0 + lam)
            j22 = (1.0 - 2.0 * n) * ((1.0 + lam) * x - 1.0)
            return np.array([[j11, j12], [j21, j22]])

    else:
        L = float(spec.L)

        def rhs(y: np.ndarray) -> np.ndarray:
            n = float(y[-1]) if feedback else 1.0
            entries = matrix_entries_at(spec, n) if feedback else nominal
            freqs = _frequencies(kind, y, include_env)
            flux = replicator_flux(entries, freqs)
            out = np.empty(dim)
            out[:2] = flux[:2] / eps
            if include_env:
                out[2] = _env_rate(n, float(y[0]), lam) if feedback else 0.0
            return out

        def jac(y: np.ndarray) -> np.ndarray:
            x1, x2 = float(y[0]), float(y[1])
            n = float(y[-1]) if feedback else 1.0
            a = matrix_entries_at(spec, n) if feedback else nominal
            x3 = 1.0 - x1 - x2
            r1 = a[0, 0] * x1 + a[0, 1] * x2 + L * x3
            r2 = a[1, 0] * x1 + a[1, 1] * x2 + L * x3
            dr1x1, dr1x2 = a[0, 0] - L, a[0, 1] - L
            dr2x1, dr2x2 = a[1, 0] - L, a[1, 1] - L
            dr1n = -(d_tr * x1 + d_ps * x2)
            dr2n = d_tr * x1 + d_ps * x2
            j = np.zeros((dim, dim))
            j[0, 0] = ((1.0 - 2.0 * x1) * r1 + x1 * (1.0 - x1) * dr1x1
                       - x2 * r2 - x1 * x2 * dr2x1 - L * x3 + L * x1) / eps
            j[0, 1] = (x1 * (1.0 - x1) * dr1x2 - x1 * r2 - x1 * x2 * dr2x2 + L * x1) / eps
            j[1, 0] = (x2 * (1.0 - x2) * dr2x1 - x2 * r1 - x1 * x2 * dr1x1 + L * x2) / eps
            j[1, 1] = ((1.0 - 2.0 * x2) * r2 + x2 * (1.0 - x2) * dr2x2
                       - x1 * r1 - x1 * x2 * dr1x2 - L * x3 + L * x2) / eps
            if include_env and feedback:
                j[0, 2] = (x1 * (1.0 - x1) * dr1n - x1 * x2 * dr2n) / eps
                j[1, 2] = (x2 * (1.0 - x2) * dr2n - x1 * x2 * dr1n) / eps
                j[2, 0] = n * (1.0 - n) * (1.0 + lam)
                j[2, 2] = (1.0 - 2.0 * n) * ((1.0 + lam) * x1 - 1.0)
            return j

    return Field(
        rhs=rhs,
        dim=dim,
        labels=_labels(kind, include_env),
        simplex=kind is GameKind.OPD,
        analytic_jacobian=jac,
        kink_margin=None,
        support_preserving=True,
        description=f"replicator {kind.value}{' + environment' if feedback else ''}",
    )


def make_pairwise_field(
    spec: GameSpec,
    coupling: EnvCoupling | None,
    rule: ComparisonRule = ComparisonRule.FITNESS_DIFFERENCE,
    include_env: bool = True,
) -> Field:
    """Pairwise comparison dynamics under the chosen switch-rate reading."""
    kind = spec.kind
    eps = coupling.epsilon if coupling else 1.0
    lam = coupling.lam if coupling else 0.0
    feedback = coupling is not None
    if feedback and not include_env:
        raise DomainError("a coupled field needs the environment coordinate")
    nominal = matrix_entries_at(spec, 1.0)
    n_strat = spec.n_strategies - 1
    dim = n_strat + (1 if include_env else 0)

    def rhs(y: np.ndarray) -> np.ndarray:
        n = float(y[-1]) if feedback else 1.0
        entries = matrix_entries_at(spec, n) if feedback else nominal
        freqs = _frequencies(kind, y, include_env)
        flux = pairwise_flux(entries, freqs, rule)
        out = np.empty(dim)
        out[:n_strat] = flux[:n_strat] / eps
        if include_env:
            out[n_strat] = _env_rate(n, float(y[0]), lam) if feedback else 0.0
        return out

    return Field(
        rhs=rhs,
        dim=dim,
        labels=_labels(kind, include_env),
        simplex=kind is GameKind.OPD,
        analytic_jacobian=None,
        kink_margin=_kink_margin_fn(spec, coupling, rule),
        description=(
            f"pairwise comparison ({rule.value}) {kind.value}"
            f"{' + environment' if feedback else ''}"
        ),
    )


def _require(form: ClosedForm, ok: bool, why: str) -> None:
    if not ok:
        raise FormMismatch(f"closed form {form.value} requires {why}")


def make_closed_form_field(
    form: ClosedForm,
    spec: GameSpec,
    coupling: EnvCoupling | None,
    include_env: bool = True,
) -> Field:
    """Literal evaluation of one polynomial closed form.

    These expressions are transcribed as printed, including the smooth
    coupled pairwise form whose (1 - x) prefactor does not switch to x
    for n > 1/2 the way the clipped protocol does.  They are intended
    for cross-validation; callers report, rather than mask, any
    disagreement with the protocol fields.
    """
    d_tr, d_ps = spec.delta_tr, spec.delta_ps
    eps = coupling.epsilon if coupling else 1.0
    lam = coupling.lam if coupling else 0.0

    if form in (ClosedForm.REPLICATOR_PD, ClosedForm.PAIRWISE_PD):
        _require(form, spec.kind is GameKind.PD, "a two-strategy spec")
        _require(form, coupling is None, "no environment coupling")
        dim = 2 if include_env else 1
        replicator = form is ClosedForm.REPLICATOR_PD

        def rhs(y: np.ndarray) -> np.ndarray:
            x = float(y[0])
            c = d_tr * x + d_ps * (1.0 - x)
            dx = -x * (1.0 - x) * c if replicator else -x * c
            if dim == 1:
                return np.array([dx])
            return np.array([dx, 0.0])

        def jac(y: np.ndarray) -> np.ndarray:
            x = float(y[0])
            c = d_ps + (d_tr - d_ps) * x
            if replicator:
                j = -((1.0 - 2.0 * x) * c + x * (1.0 - x) * (d_tr - d_ps))
            else:
                j = -(c + x * (d_tr - d_ps))
            if dim == 1:
                return np.array([[j]])
            return np.array([[j, 0.0], [0.0, 0.0]])

        labels = _labels(GameKind.PD, include_env)
        simplex = False

    elif form is ClosedForm.PAIRWISE_PD_FEEDBACK:
        _require(form, spec.kind is GameKind.PD, "a two-strategy spec")
        _require(form, coupling is not None, "an environment coupling")
        _require(form, include_env, "the environment coordinate")
        dim = 2

        def rhs(y: np.ndarray) -> np.ndarray:
            x, n = float(y[0]), float(y[1])
            dx = (1.0 - x) * (d_ps + (d_tr - d_ps) * x) * (1.0 - 2.0 * n) / eps
            return np.array([dx, _env_rate(n, x, lam)])

        def jac(y: np.ndarray) -> np.ndarray:
            x, n = float(y[0]), float(y[1])
            j11 = (1.0 - 2.0 * n) * ((d_tr - 2.0 * d_ps) - 2.0 * x * (d_tr - d_ps)) / eps
            j12 = -2.0 * (1.0 - x) * (d_ps + (d_tr - d_ps) * x) / eps
            j21 = n * (1.0 - n) * (1.0 + lam)
            j22 = (1.0 - 2.0 * n) * ((1.0 + lam) * x - 1.0)
            return np.array([[j11, j12], [j21, j22]])

        labels = _labels(GameKind.PD, True)
        simplex = False

    elif form is ClosedForm.REPLICATOR_OPD_FEEDBACK:
        _require(form, spec.kind is GameKind.OPD, "a three-strategy spec")
        _require(form, coupling is not None, "an environment coupling")
        _require(form, include_env, "the environment coordinate")
        dim = 3
        L = float(spec.L)

        def rhs(y: np.ndarray) -> np.ndarray:
            x1, x2, n = float(y[0]), float(y[1]), float(y[2])
            a = matrix_entries_at(spec, n)
            x3 = 1.0 - x1 - x2
            r1 = a[0, 0] * x1 + a[0, 1] * x2 + L * x3
            r2 = a[1, 0] * x1 + a[1, 1] * x2 + L * x3
            dx1 = (x1 * (1.0 - x1) * r1 - x1 * x2 * r2 - x1 * L * x3) / eps
            dx2 = (x2 * (1.0 - x2) * r2 - x1 * x2 * r1 - x2 * L * x3) / eps
            return np.array([dx1, dx2, _env_rate(n, x1, lam)])

        jac = None
        labels = _labels(GameKind.OPD, True)
        simplex = True

    elif form is ClosedForm.PAIRWISE_OPD_FEEDBACK:
        _require(form, spec.kind is GameKind.OPD, "a three-strategy spec")
        _require(form, coupling is not None, "an environment coupling")
        _require(form, include_env, "the environment coordinate")
        dim = 3
        d_tl, d_pl, d_rl = spec.delta_tl, spec.delta_pl, spec.delta_rl

        def rhs(y: np.ndarray) -> np.ndarray:
            x1, x2, n = float(y[0]), float(y[1]), float(y[2])
            x3 = 1.0 - x1 - x2
            c = d_tr * x1 + d_ps * x2
            dx1 = ((x2 - 3.0 * n * x1) * c + d_tl * x1 * x3 + d_pl * x1 * x2) / eps
            dx2 = ((x1 - 2.0 * n * x2) * c
                   + x3 * ((d_rl + d_tr * n) * x1 + d_ps * n * x2)
                   + d_tl * x1 * x2) / eps
            return np.array([dx1, dx2, _env_rate(n, x1, lam)])

        jac = None
        labels = _labels(GameKind.OPD, True)
        simplex = True

    else:  # pragma: no cover - enum is exhaustive
        raise FormMismatch(f"unknown closed form {form!r}")

    return Field(
        rhs=rhs,
        dim=dim,
        labels=labels,
        simplex=simplex,
        analytic_jacobian=jac,
        kink_margin=None,
        support_preserving=form in (ClosedForm.REPLICATOR_PD, ClosedForm.REPLICATOR_OPD_FEEDBACK),
        description=f"closed form {form.value}",
    )


def make_field(
    spec: GameSpec,
    coupling: EnvCoupling | None,
    config: DynamicsConfig,
) -> Field:
    """Field for a dynamics configuration; feedback requires a coupling."""
    if config.feedback and coupling is None:
        raise DomainError("feedback dynamics require an EnvCoupling")
    effective = coupling if config.feedback else None
    if config.protocol is Protocol.REPLICATOR:
        return make_replicator_field(spec, effective)
    return make_pairwise_field(spec, effective, config.comparison_rule)


# --- state-level operations ------------------------------------------------

def replicator_field(
    spec: GameSpec, coupling: EnvCoupling | None, state: PopulationState
) -> np.ndarray:
    """Replicator derivative at one state (coupled when a coupling is given)."""
    return make_replicator_field(spec, coupling)(state.vector())


def pairwise_field(
    spec: GameSpec,
    coupling: EnvCoupling | None,
    state: PopulationState,
    rule: ComparisonRule = ComparisonRule.FITNESS_DIFFERENCE,
) -> np.ndarray:
    """Pairwise-comparison derivative at one state."""
    return make_pairwise_field(spec, coupling, rule)(state.vector())


def closed_form_field(
    form: ClosedForm,
    spec: GameSpec,
    coupling: EnvCoupling | None,
    state: PopulationState,
) -> np.ndarray:
    """Literal closed-form derivative at one state (cross-check use)."""
    return make_closed_form_field(form, spec, coupling)(state.vector())
