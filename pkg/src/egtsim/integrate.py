"""Time integration of the coupled game/environment fields.

Two schemes: a fixed-step classical Runge-Kutta of order 4 and an
adaptive Runge-Kutta-Fehlberg 4(5) pair with the fifth-order solution
propagated.  Both the simplex faces and the n in {0, 1} boundaries are
invariant for the exact flow, so after every accepted step the state is
hard-clamped back onto the admissible domain; clamps only repair
numerical overshoot of the order of the local tolerance, and any clamp
beyond 1e-9 is logged as an event so silent repairs cannot hide a
misbehaving run.

Integration is deterministic: identical inputs give bitwise-identical
trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from typing import Iterator

import numpy as np

from .dynamics import Field, PopulationState

__all__ = [
    "Method",
    "IntegratorConfig",
    "ClampEvent",
    "Trajectory",
    "StepLimitExceeded",
    "NonFiniteState",
    "integrate",
    "sample_phase_grid",
]

#: Clamps smaller than this are accumulated but not logged as events.
CLAMP_EVENT_THRESHOLD = 1e-9


class Method(Enum):
    RK4_FIXED = "rk4"
    RK45_ADAPTIVE = "rk45"


class StepLimitExceeded(RuntimeError):
    """The integrator hit max_steps (or step-size underflow) before t_end."""


class NonFiniteState(RuntimeError):
    """The field returned NaN or infinity."""


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.RK45_ADAPTIVE
    step: float = 1e-3  # fixed step, or initial step for the adaptive scheme
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    t_end: float = 30.0
    max_steps: int = 2_000_000

    def __post_init__(self) -> None:
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError("step must be positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class ClampEvent:
    t: float
    kind: str  # "clamp" (componentwise) or "renormalize" (simplex projection)
    magnitude: float


@dataclass
class Trajectory:
    """Time-ordered samples of one integration run.

    ``y`` has one row per accepted step (the initial state included) and
    one column per state coordinate, in the order given by ``labels``.
    ``total_clamp`` accumulates every repair applied, including those too
    small to appear in ``events``.
    """

    t: np.ndarray
    y: np.ndarray
    labels: tuple[str, ...]
    config: IntegratorConfig
    events: list[ClampEvent] = dataclass_field(default_factory=list)
    total_clamp: float = 0.0

    def __len__(self) -> int:
        return len(self.t)

    def component(self, label: str) -> np.ndarray:
        try:
            idx = self.labels.index(label)
        except ValueError:
            raise KeyError(f"no component {label!r}; trajectory has {self.labels}") from None
        return self.y[:, idx]

    def states(self) -> Iterator[PopulationState]:
        for ti, yi in zip(self.t, self.y):
            yield PopulationState(x=tuple(yi[:-1]), n=float(yi[-1]), t=float(ti))

    def final_state(self) -> PopulationState:
        return PopulationState(x=tuple(self.y[-1, :-1]), n=float(self.y[-1, -1]), t=float(self.t[-1]))

    def resample(self, dt: float) -> "Trajectory":
        """Uniform-cadence copy via linear interpolation (for fixed-step export)."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        t0, t1 = float(self.t[0]), float(self.t[-1])
        n_pts = int(math.floor((t1 - t0) / dt + 1e-12)) + 1
        tt = t0 + dt * np.arange(n_pts)
        yy = np.column_stack([np.interp(tt, self.t, self.y[:, j]) for j in range(self.y.shape[1])])
        return Trajectory(t=tt, y=yy, labels=self.labels, config=self.config,
                          events=list(self.events), total_clamp=self.total_clamp)


def _clamp(y: np.ndarray, labels: tuple[str, ...], simplex: bool) -> tuple[np.ndarray, float, float]:
    """Project a raw step result back onto the admissible domain.

    Returns the repaired vector plus the componentwise-clamp and
    simplex-renormalization magnitudes (L1 change).
    """
    repaired = np.clip(y, 0.0, 1.0)
    clamp_mag = float(np.abs(repaired - y).sum())
    renorm_mag = 0.0
    if simplex:
        s = repaired[0] + repaired[1]
        if s > 1.0:
            before = repaired.copy()
            excess = s - 1.0
            repaired[0] -= 0.5 * excess
            repaired[1] -= 0.5 * excess
            # a component may have been pushed negative; shift the slack to the other
            for a, b in ((0, 1), (1, 0)):
                if repaired[a] < 0.0:
                    repaired[b] = min(repaired[b] + repaired[a], 1.0)
                    repaired[a] = 0.0
            renorm_mag = float(np.abs(repaired - before).sum())
    return repaired, clamp_mag, renorm_mag


# Runge-Kutta-Fehlberg 4(5) tableau.
_RKF_B5 = (16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0)
_RKF_ERR = (1.0 / 360.0, 0.0, -128.0 / 4275.0, -2197.0 / 75240.0, 1.0 / 50.0, 2.0 / 55.0)


def _rkf45_step(f: Field, y: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    k1 = f(y)
    k2 = f(y + h * 0.25 * k1)
    k3 = f(y + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2))
    k4 = f(y + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3))
    k5 = f(y + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 - 845.0 / 4104.0 * k4))
    k6 = f(y + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3
                    + 1859.0 / 4104.0 * k4 - 11.0 / 40.0 * k5))
    ks = (k1, k2, k3, k4, k5, k6)
    y_new = y + h * sum(b * k for b, k in zip(_RKF_B5, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_RKF_ERR, ks) if e != 0.0)
    return y_new, err


def _rk4_step(f: Field, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(field: Field, s0: PopulationState, cfg: IntegratorConfig) -> Trajectory:
    """Advance ``s0`` to ``cfg.t_end`` under ``field``.

    Samples are emitted at the integrator's accepted steps.  Raises
    :class:`NonFiniteState` if the field blows up and
    :class:`StepLimitExceeded` when max_steps (or the smallest sensible
    step size) is exhausted first.
    """
    y = s0.vector()
    if len(y) != field.dim:
        raise ValueError(f"state has {len(y)} coordinates but the field expects {field.dim}")
    t0 = float(s0.t)
    t_end = t0 + cfg.t_end
    ts = [t0]
    ys = [y.copy()]
    events: list[ClampEvent] = []
    total_clamp = 0.0
    n_steps = 0

    # Replicator flows never repopulate an absent strategy, so a run that
    # starts without abstainers stays on that simplex face exactly; hold
    # the face against round-off (which would otherwise seed abstainers
    # that can grow by many orders of magnitude per cycle).
    pin_face = (
        field.support_preserving
        and field.simplex
        and abs(y[0] + y[1] - 1.0) <= 1e-12
    )

    def settle(t_now: float, y_raw: np.ndarray) -> np.ndarray:
        nonlocal total_clamp
        if not np.all(np.isfinite(y_raw)):
            raise NonFiniteState(f"non-finite state at t = {t_now}")
        repaired, clamp_mag, renorm_mag = _clamp(y_raw, field.labels, field.simplex)
        if pin_face:
            s = repaired[0] + repaired[1]
            if s > 0.0 and s != 1.0:
                total_clamp += abs(repaired[0] / s - repaired[0]) + abs(repaired[1] / s - repaired[1])
                repaired[0] /= s
                repaired[1] /= s
        total_clamp += clamp_mag + renorm_mag
        if clamp_mag > CLAMP_EVENT_THRESHOLD:
            events.append(ClampEvent(t_now, "clamp", clamp_mag))
        if renorm_mag > CLAMP_EVENT_THRESHOLD:
            events.append(ClampEvent(t_now, "renormalize", renorm_mag))
        return repaired

    if cfg.method is Method.RK4_FIXED:
        t = t0
        i = 0
        while t < t_end - 1e-12 * max(1.0, abs(t_end)):
            n_steps += 1
            if n_steps > cfg.max_steps:
                raise StepLimitExceeded(f"more than {cfg.max_steps} steps before t_end")
            i += 1
            t_next = min(t0 + i * cfg.step, t_end)
            y = settle(t_next, _rk4_step(field, y, t_next - t))
            t = t_next
            ts.append(t)
            ys.append(y.copy())
    else:
        t = t0
        h = min(cfg.step, cfg.t_end)
        while t < t_end - 1e-12 * max(1.0, abs(t_end)):
            n_steps += 1
            if n_steps > cfg.max_steps:
                raise StepLimitExceeded(f"more than {cfg.max_steps} steps before t_end")
            h = min(h, t_end - t)
            if h < 1e-14 * max(1.0, abs(t)):
                raise StepLimitExceeded("adaptive step size underflow")
            y_new, err = _rkf45_step(field, y, h)
            if not np.all(np.isfinite(y_new)):
                raise NonFiniteState(f"non-finite state at t = {t + h}")
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            ratio = float(np.sqrt(np.mean((err / scale) ** 2)))
            if ratio > 1.0:
                h *= max(0.2, 0.9 * ratio ** -0.2)
                continue
            t = t + h
            y = settle(t, y_new)
            ts.append(t)
            ys.append(y.copy())
            factor = 5.0 if ratio == 0.0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            h *= factor

    return Trajectory(
        t=np.asarray(ts),
        y=np.asarray(ys),
        labels=field.labels,
        config=cfg,
        events=events,
        total_clamp=total_clamp,
    )


def sample_phase_grid(field: Field, resolution) -> list[tuple[np.ndarray, np.ndarray]]:
    """Evaluate the field on a regular lattice over its admissible domain.

    ``resolution`` is the number of lattice points per axis (one int for
    all axes or a tuple).  For three-strategy fields the lattice points
    violating x1 + x2 <= 1 are skipped.  Returns (state, derivative)
    pairs in row-major order.
    """
    if isinstance(resolution, int):
        res = (resolution,) * field.dim
    else:
        res = tuple(resolution)
        if len(res) != field.dim:
            raise ValueError(f"need {field.dim} resolutions, got {len(res)}")
    if any(r < 2 for r in res):
        raise ValueError("grid resolution must be at least 2 per axis")
    axes = [np.linspace(0.0, 1.0, r) for r in res]
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([g.ravel() for g in grids])
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    for row in points:
        if field.simplex and row[0] + row[1] > 1.0 + 1e-12:
            continue
        pairs.append((row.copy(), field(row)))
    return pairs
