"""Payoff structures for environment-coupled social dilemmas.

A two-strategy dilemma (cooperate/defect) is described by the classical
payoffs R (reward), S (sucker), T (temptation) and P (punishment); the
optional three-strategy variant adds an abstain strategy that earns the
loner payoff L whenever either player abstains.

The matrix the players face interpolates linearly in an environmental
level n between a degraded configuration at n = 0 (the cooperate and
defect rows swapped) and the nominal matrix at n = 1:

    A(n) = (1 - n) * A_swapped + n * A_nominal

so that a replete environment rewards defection as usual while a
depleted one inverts the incentive.  The abstain row and column, when
present, are constant L for every n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "GameKind",
    "GameSpec",
    "PayoffMatrix",
    "EnvCoupling",
    "OrderingViolation",
    "DomainError",
    "DimensionMismatch",
    "validate_spec",
    "payoff_matrix_at",
    "fitness",
    "SIMPLEX_TOL",
]

#: Tolerance on |sum(x) - 1| below which a frequency vector is renormalized.
SIMPLEX_TOL = 1e-9


class GameKind(Enum):
    """Two-strategy dilemma, or the optional variant with an abstain strategy."""

    PD = "pd"
    OPD = "opd"


class OrderingViolation(ValueError):
    """The payoff ordering required for the dilemma does not hold."""


class DomainError(ValueError):
    """A scalar argument lies outside its admissible interval."""


class DimensionMismatch(ValueError):
    """Vector or matrix dimensions are inconsistent."""


@dataclass(frozen=True)
class GameSpec:
    """Immutable payoff parameters for one game.

    ``L`` must be present exactly when ``kind`` is OPD.  The payoff gaps
    used throughout the reduced dynamics are exposed as properties
    (``delta_tr = T - R`` and so on).
    """

    kind: GameKind
    R: float
    S: float
    T: float
    P: float
    L: float | None = None

    def __post_init__(self) -> None:
        values = [self.R, self.S, self.T, self.P]
        if self.kind is GameKind.OPD:
            if self.L is None:
                raise DomainError("OPD spec requires the loner payoff L")
            values.append(self.L)
        elif self.L is not None:
            raise DomainError("PD spec must not carry a loner payoff L")
        if not all(math.isfinite(v) for v in values):
            raise DomainError("all payoffs must be finite")

    @property
    def n_strategies(self) -> int:
        return 2 if self.kind is GameKind.PD else 3

    @property
    def delta_tr(self) -> float:
        return self.T - self.R

    @property
    def delta_ps(self) -> float:
        return self.P - self.S

    @property
    def delta_tl(self) -> float:
        assert self.L is not None
        return self.T - self.L

    @property
    def delta_rl(self) -> float:
        assert self.L is not None
        return self.R - self.L

    @property
    def delta_pl(self) -> float:
        assert self.L is not None
        return self.P - self.L


@dataclass(frozen=True)
class PayoffMatrix:
    """Dense payoff matrix, 2x2 for PD and 3x3 for OPD."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch(f"payoff matrix must be square, got {entries.shape}")
        if entries.shape[0] not in (2, 3):
            raise DimensionMismatch("payoff matrix dimension must be 2 or 3")
        if not np.all(np.isfinite(entries)):
            raise DomainError("payoff matrix entries must be finite")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EnvCoupling:
    """Environment parameters of the coupled dynamics.

    ``lam`` is the ratio of environmental enhancement by cooperators to
    degradation by defectors; ``epsilon`` is the time-scale factor that
    divides the strategy equations (small epsilon means strategies move
    fast relative to the environment).
    """

    lam: float
    epsilon: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError("lambda must be a finite positive number")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise DomainError("epsilon must be a finite positive number")


def _ordering_violations(spec: GameSpec) -> list[str]:
    """Names of the violated inequalities in the dilemma ordering chain."""
    if spec.kind is GameKind.PD:
        chain = [("T > R", spec.T, spec.R), ("R > P", spec.R, spec.P), ("P > S", spec.P, spec.S)]
    else:
        chain = [
            ("T > R", spec.T, spec.R),
            ("R > L", spec.R, spec.L),
            ("L > P", spec.L, spec.P),
            ("P > S", spec.P, spec.S),
        ]
    return [name for name, hi, lo in chain if not hi > lo]


def validate_spec(spec: GameSpec, strict: bool = True) -> GameSpec:
    """Check the dilemma payoff ordering (T > R > P > S, with L between R and P
    for the optional game).

    With ``strict`` on, a violated inequality raises :class:`OrderingViolation`
    naming it.  With ``strict`` off, deliberately degenerate or inverted
    payoffs are admitted with a warning so they can still be simulated.
    """
    violated = _ordering_violations(spec)
    if violated:
        msg = f"payoff ordering violated: {', '.join(violated)}"
        if strict:
            raise OrderingViolation(msg)
        warnings.warn(msg, UserWarning, stacklevel=2)
    return spec


def _nominal_entries(spec: GameSpec) -> np.ndarray:
    """The matrix at n = 1 (replete environment)."""
    if spec.kind is GameKind.PD:
        return np.array([[spec.R, spec.S], [spec.T, spec.P]], dtype=float)
    L = spec.L
    return np.array(
        [[spec.R, spec.S, L], [spec.T, spec.P, L], [L, L, L]], dtype=float
    )


def _swapped_entries(spec: GameSpec) -> np.ndarray:
    """The matrix at n = 0 (depleted environment): cooperate/defect rows swapped."""
    if spec.kind is GameKind.PD:
        return np.array([[spec.T, spec.P], [spec.R, spec.S]], dtype=float)
    L = spec.L
    return np.array(
        [[spec.T, spec.P, L], [spec.R, spec.S, L], [L, L, L]], dtype=float
    )


def matrix_entries_at(spec: GameSpec, n: float) -> np.ndarray:
    """Raw interpolated entries, valid for any real n (used by field evaluation,
    which may probe slightly outside [0, 1] for finite differencing)."""
    if n == 1.0:
        return _nominal_entries(spec)
    if n == 0.0:
        return _swapped_entries(spec)
    return (1.0 - n) * _swapped_entries(spec) + n * _nominal_entries(spec)


def payoff_matrix_at(spec: GameSpec, n: float) -> PayoffMatrix:
    """Environment-dependent payoff matrix A(n) for n in [0, 1].

    The endpoints are exact: A(1) is the nominal matrix and A(0) the
    row-swapped one.  At n = 1/2 the cooperate and defect rows coincide,
    so the two fitnesses are identical there for every frequency vector.
    """
    if not (math.isfinite(n) and 0.0 <= n <= 1.0):
        raise DomainError(f"environment level n = {n!r} outside [0, 1]")
    return PayoffMatrix(matrix_entries_at(spec, n))


def fitness(matrix: PayoffMatrix, x) -> np.ndarray:
    """Per-strategy fitness r = A x for a frequency vector x on the simplex.

    Vectors whose components sum to 1 within ``SIMPLEX_TOL`` are
    renormalized; larger deviations raise :class:`DomainError` so that
    integrator drift cannot silently corrupt fitness values.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (matrix.dim,):
        raise DimensionMismatch(
            f"frequency vector of length {x.shape} does not match a {matrix.dim}-strategy matrix"
        )
    total = float(x.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise DomainError(f"frequency vector sums to {total!r}, not 1 within {SIMPLEX_TOL}")
    if total != 1.0:
        x = x / total
    return matrix.entries @ x
