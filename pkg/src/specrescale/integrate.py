"""Embedded Runge-Kutta-Fehlberg 4(5) integration with per-unit-step error control."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonFiniteState, StepUnderflow

log = logging.getLogger(__name__)

__all__ = ["IntegratorConfig", "StepRecord", "IntegrationResult", "integrate_until", "FEHLBERG45"]


@dataclass(frozen=True)
class Tableau:
    name: str
    c: tuple
    a: tuple
    b_low: tuple   # propagated solution (4th order)
    b_high: tuple  # embedded solution (5th order), used only for the error estimate
    order: int = 4


FEHLBERG45 = Tableau(
    name="fehlberg45",
    c=(0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2),
    a=(
        (),
        (1 / 4,),
        (3 / 32, 9 / 32),
        (1932 / 2197, -7200 / 2197, 7296 / 2197),
        (439 / 216, -8.0, 3680 / 513, -845 / 4104),
        (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
    ),
    b_low=(25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0),
    b_high=(16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55),
)


@dataclass(frozen=True)
class IntegratorConfig:
    tol_per_unit_step: float = 1e-10
    dt_init: float = 1e-3
    dt_min: float = 1e-14
    dt_max: float = 1e-1
    safety_factor: float = 0.9

    def __post_init__(self):
        if not self.tol_per_unit_step > 0:
            raise ValueError("tol_per_unit_step must be positive")
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("require 0 < dt_min <= dt_init <= dt_max")
        if not 0 < self.safety_factor < 1:
            raise ValueError("safety_factor must lie in (0, 1)")


@dataclass
class StepRecord:
    t_local: float
    dt_taken: float
    error_estimate: float
    accepted: bool


@dataclass
class IntegrationResult:
    state: np.ndarray
    t: float
    steps: list[StepRecord] = field(default_factory=list)
    stopped: bool = False   # True when the stop predicate fired
    dt_next: float = 0.0

    @property
    def accepted(self) -> list[StepRecord]:
        return [s for s in self.steps if s.accepted]


def _step_factor(err: float, tol: float, dt: float, safety: float) -> float:
    if err == 0.0:
        return 5.0
    return float(np.clip(safety * (tol * dt / err) ** 0.2, 0.1, 5.0))


def integrate_until(
    state: np.ndarray,
    rhs: Callable[[np.ndarray, float], np.ndarray],
    cfg: IntegratorConfig,
    stop: Callable[[np.ndarray, float], bool] | None = None,
    t_max: float = np.inf,
    t0: float = 0.0,
    on_step: Callable[[np.ndarray, float, float], None] | None = None,
    tableau: Tableau = FEHLBERG45,
) -> IntegrationResult:
    """Advance ``state`` until ``stop(state, t)`` holds or ``t_max`` is reached.

    A step is accepted when the embedded error estimate (max norm over all
    entries) is at most ``tol * dt``.  ``stop`` and ``on_step`` see only
    accepted states.  Works on any numpy array, real or complex.

    Raises ``StepUnderflow`` when the controller asks for ``dt < dt_min``
    and ``NonFiniteState`` when an accepted state contains NaN or Inf.
    """
    y = np.array(state, copy=True)
    t = t0
    dt = min(cfg.dt_init, cfg.dt_max)
    tol = cfg.tol_per_unit_step
    result = IntegrationResult(y, t)
    s = len(tableau.c)
    k = [None] * s
    err_weights = np.array(tableau.b_high) - np.array(tableau.b_low)

    while t < t_max:
        last = False
        if t + dt >= t_max:
            dt = t_max - t
            last = True
        for i in range(s):
            yi = y
            for j, aij in enumerate(tableau.a[i]):
                if aij:
                    yi = yi + (dt * aij) * k[j]
            k[i] = rhs(yi, t + tableau.c[i] * dt)
        y_new = y
        delta = 0
        for i in range(s):
            if tableau.b_low[i]:
                y_new = y_new + (dt * tableau.b_low[i]) * k[i]
            if err_weights[i]:
                delta = delta + (dt * err_weights[i]) * k[i]
        err = float(np.max(np.abs(delta))) if np.ndim(delta) else abs(delta)
        if not np.isfinite(err):
            err = np.inf
        accepted = err <= tol * dt
        result.steps.append(StepRecord(t, dt, err, accepted))
        factor = _step_factor(err, tol, dt, cfg.safety_factor) if np.isfinite(err) else 0.1
        if accepted:
            if not np.all(np.isfinite(y_new)):
                raise NonFiniteState(f"non-finite state at t={t + dt:.6g}")
            y = y_new
            t = t_max if last else t + dt
            if on_step is not None:
                on_step(y, t, dt)
            if stop is not None and stop(y, t):
                result.stopped = True
                dt = min(dt * factor, cfg.dt_max)
                break
            if last:
                break
            dt = min(dt * factor, cfg.dt_max)
        else:
            dt = dt * factor
        if dt < cfg.dt_min:
            result.state, result.t = y, t
            exc = StepUnderflow(f"dt={dt:.3e} below dt_min={cfg.dt_min:.1e} at t={t:.9g}")
            exc.result = result
            raise exc

    result.state, result.t, result.dt_next = y, t, dt
    return result
