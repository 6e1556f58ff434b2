"""Comparison methods: penalty springs and an event-driven reference solver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .integrators import AdaptiveStepper, IntegrationError, IntegratorConfig, Trajectory, dp45_step
from .models import GalerkinStringModel, SdofModel
from .nonsmooth_core import ConstraintSet, ImpactLaw, PhysicalState


class ZenoError(IntegrationError):
    """Too many impacts; the event loop gave up."""


@dataclass(frozen=True)
class PenaltyParams:
    k_p: float

    def __post_init__(self):
        if not self.k_p > 0:
            raise ValueError(f"penalty stiffness must be positive, got {self.k_p!r}")


def penalty_sdof_rhs(p, pdot, t, model: SdofModel, pen: PenaltyParams):
    """Oscillator with a one-sided spring ``k_p`` engaged when ``p < d``."""
    mu = 1.0 if p < model.d else 0.0
    return -(model.k_s * p + model.c * pdot + mu * pen.k_p * (p - model.d)) / model.m


def penalty_string_rhs(p, pdot, t, model: GalerkinStringModel, cs: ConstraintSet, pen: PenaltyParams):
    acc = model.physical_rhs(p, pdot, t)
    if cs.m:
        pen_depth = cs.gaps - p[cs.constrained_indices]
        acc[cs.constrained_indices] += pen.k_p * np.maximum(pen_depth, 0.0)
    return acc


def penalty_sdof_system(model: SdofModel, pen: PenaltyParams):
    """First-order ``rhs(t, y)`` for ``y = [p, pdot]``."""
    def rhs(t, y):
        return np.array([y[1], penalty_sdof_rhs(y[0], y[1], t, model, pen)])
    return rhs


def penalty_string_system(model: GalerkinStringModel, cs: ConstraintSet, pen: PenaltyParams):
    """First-order ``rhs(t, y)`` for ``y = [p, pdot]`` on the string grid."""
    N = model.N

    def rhs(t, y):
        p, pdot = y[:N], y[N:]
        return np.concatenate([pdot, penalty_string_rhs(p, pdot, t, model, cs, pen)])
    return rhs


def event_reference(accel: Callable[[float, float, float], float], d: float, law: ImpactLaw,
                    p0: float, v0: float, t_end: float, rtol: float = 1e-12, atol: float = 1e-12,
                    event_tol: float = 1e-12, max_impacts: int = 1_000_000,
                    max_step: float = math.inf) -> Trajectory:
    """Event-driven solution of ``p'' = accel(p, p', t)``, ``p >= d`` with restitution ``R``.

    Between impacts the smooth system is integrated with Dormand-Prince. A
    step that ends below ``d`` is bisected (re-stepping from its start) until
    ``0 <= p - d < event_tol``; the velocity is then reflected as ``-R v``.
    Bounces too small to resolve at ``event_tol`` switch to resting contact,
    held while the free acceleration pushes into the obstacle.
    Impacts are recorded in ``metadata["impacts"]`` as ``(t, v_minus, v_plus)``.
    """
    if p0 < d:
        raise ValueError(f"initial displacement {p0!r} violates p >= {d!r}")

    def rhs(t, y):
        return np.array([y[1], accel(y[0], y[1], t)])

    eps_t = 4 * np.finfo(float).eps
    impacts: list[tuple[float, float, float]] = []
    times, states = [0.0], [np.array([p0, v0], dtype=float)]
    t_final = float(t_end)

    def record(t, y):
        if t > times[-1]:
            times.append(t)
            states.append(np.array(y, dtype=float))
        else:
            states[-1] = np.array(y, dtype=float)

    def impact(t, y):
        v_minus = y[1]
        v_plus = -law.R * v_minus
        impacts.append((t, v_minus, v_plus))
        if len(impacts) > max_impacts:
            raise ZenoError(f"more than {max_impacts} impacts before t={t:.17g}; Zeno behaviour")
        return np.array([y[0], v_plus])

    def resting(t, y):
        a = accel(d, 0.0, t)
        return y[0] - d < event_tol and a <= 0 and y[1] ** 2 <= 2.0 * abs(a) * event_tol

    y = np.array([p0, v0], dtype=float)
    t = 0.0
    if p0 - d <= 0 and v0 < 0:
        y = impact(t, y)
        record(t, y)
    stepper = AdaptiveStepper(rhs, t, y, rtol, atol, max_step=max_step)
    rest_step = None
    while stepper.t < t_final:
        if resting(stepper.t, stepper.y):
            # pinned on the obstacle; poll for release
            rest_step = rest_step or min(1e-2, t_final / 100.0)
            t_next = min(t_final, stepper.t + rest_step)
            y_rest = np.array([d, 0.0])
            record(t_next, y_rest)
            if accel(d, 0.0, t_next) > 0:
                stepper.reset(t_next, y_rest)
            else:
                stepper.t, stepper.y = t_next, y_rest
            continue
        t0, y0, k0 = stepper.t, stepper.y.copy(), stepper.k1
        h = stepper.advance(t_final - stepper.t)
        if stepper.y[0] - d >= 0:
            if t_final - stepper.t <= eps_t * max(1.0, t_final):
                stepper.t = t_final
            record(stepper.t, stepper.y)
            continue
        # crossing inside (t0, t0+h): bisect on the sub-step length
        lo, hi, y_lo = 0.0, h, y0
        while True:
            mid = 0.5 * (lo + hi)
            y_mid = dp45_step(rhs, t0, y0, mid, k0)[0]
            stepper.rhs_evals += 6
            g = y_mid[0] - d
            if g >= 0:
                lo, y_lo = mid, y_mid
                if g < event_tol:
                    break
            else:
                hi = mid
            if hi - lo <= eps_t * max(1.0, t0):
                break
        t_c = t0 + lo
        record(t_c, y_lo)
        y_post = impact(t_c, y_lo)
        states[-1] = y_post
        stepper.reset(t_c, y_post)
    return Trajectory(np.array(times), np.array(states), {
        "method": "event_reference", "R": law.R, "rtol": rtol, "atol": atol,
        "impacts": impacts, "termination": "t_end", "steps": stepper.n_accepted, "rhs_evals": stepper.rhs_evals,
    })


def event_reference_sdof(model: SdofModel, law: ImpactLaw, initial: PhysicalState | tuple,
                         t_end: float, tolerances: IntegratorConfig | tuple | None = None,
                         max_impacts: int = 1_000_000) -> Trajectory:
    if isinstance(initial, PhysicalState):
        p0, v0 = float(np.ravel(initial.p)[0]), float(np.ravel(initial.pdot)[0])
    else:
        p0, v0 = map(float, initial)
    if tolerances is None:
        rtol = atol = 1e-12
    elif isinstance(tolerances, IntegratorConfig):
        rtol, atol = tolerances.rtol, tolerances.atol
    else:
        rtol, atol = tolerances
    return event_reference(lambda p, v, t: model.accel(p, v, t), model.d, law, p0, v0, t_end,
                           rtol=rtol, atol=atol, max_impacts=max_impacts)
