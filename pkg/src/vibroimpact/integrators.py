"""Fixed-step RK4 and adaptive Dormand-Prince 5(4) integration.

Right-hand sides use the ``rhs(t, y) -> dy/dt`` convention. The integrators
know nothing about contact; all nonsmoothness lives inside ``rhs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Rhs = Callable[[float, np.ndarray], np.ndarray]
EnergyFn = Callable[[np.ndarray], float]


class IntegrationError(RuntimeError):
    """Numerical abort: non-finite state or step-size underflow."""


@dataclass
class IntegratorConfig:
    dt: float = 1e-4
    t_end: float = 10.0
    rtol: float = 1e-12
    atol: float = 1e-12
    energy_floor: Optional[float] = None
    sample_stride: int = 1
    h0: Optional[float] = None
    max_step: float = math.inf

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if int(self.sample_stride) < 1:
            raise ValueError("sample_stride must be >= 1")
        self.sample_stride = int(self.sample_stride)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim == 1:
            self.states = self.states[:, None]
        if self.times.ndim != 1 or self.states.shape[0] != self.times.size:
            raise ValueError("times and states disagree on sample count")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def at(self, t, component=None):
        """Linear interpolation of one component (or all) at times ``t``."""
        t = np.asarray(t, dtype=float)
        lo, hi = self.span
        if np.any(t < lo) or np.any(t > hi):
            raise ValueError(f"query times outside trajectory span [{lo}, {hi}]")
        if component is not None:
            return np.interp(t, self.times, self.states[:, component])
        cols = [np.interp(t, self.times, self.states[:, j]) for j in range(self.states.shape[1])]
        return np.stack(cols, axis=-1)


def energy_termination(state, energy: EnergyFn, floor: Optional[float]) -> bool:
    """True when the run should stop (energy dropped below ``floor``)."""
    if floor is None or floor <= 0:
        return False
    return energy(state) < floor


def _check_finite(y, step, t):
    if not np.all(np.isfinite(y)):
        bad = int(np.flatnonzero(~np.isfinite(y))[0])
        raise IntegrationError(f"non-finite state component {bad} at step {step} (t={t:.17g})")


def rk4_step(rhs: Rhs, y, t, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_count(t_end: float, dt: float) -> int:
    # guard against t_end/dt landing a hair above an integer
    return max(1, math.ceil(t_end / dt - 1e-9))


def integrate_fixed(rhs: Rhs, y0, config: IntegratorConfig, energy: Optional[EnergyFn] = None,
                    t0: float = 0.0) -> Trajectory:
    """Classical RK4 from ``t0`` to ``t0 + t_end``; the last step is shortened to land on the end.

    Times are ``t0 + i*dt`` (not accumulated), so runs are bit-reproducible.
    """
    y = np.array(y0, dtype=float)
    dt, stride = config.dt, config.sample_stride
    n_steps = step_count(config.t_end, dt)
    t_final = t0 + config.t_end
    times = [t0]
    states = [y.copy()]
    reason = "t_end"
    t = t0
    i = 0
    for i in range(1, n_steps + 1):
        t_next = t_final if i == n_steps else t0 + i * dt
        y = rk4_step(rhs, y, t, t_next - t)
        t = t_next
        _check_finite(y, i, t)
        stop = energy is not None and energy_termination(y, energy, config.energy_floor)
        if i % stride == 0 or i == n_steps or stop:
            times.append(t)
            states.append(y.copy())
        if stop:
            reason = "energy_floor"
            break
    return Trajectory(np.array(times), np.array(states), {
        "method": "rk4", "dt": dt, "steps": i, "rhs_evals": 4 * i, "termination": reason,
    })


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_HAT = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_HAT


def dp45_step(rhs: Rhs, t, y, h, k1=None):
    """One Dormand-Prince step. Returns ``(y_new, err, k_last)``; ``k_last`` is FSAL."""
    if k1 is None:
        k1 = rhs(t, y)
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], ks) if a != 0.0)
        ks.append(rhs(t + _C[i] * h, yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B, ks) if b != 0.0)
    err = h * sum(e * kj for e, kj in zip(_E, ks))
    return y_new, err, ks[6]


def error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


class AdaptiveStepper:
    """Dormand-Prince stepping with a PI step-size controller.

    ``advance`` takes one accepted step, retrying with smaller ``h`` after
    rejections. Exposed separately so event-driven loops can reuse it.
    """

    order = 5
    safety = 0.9
    min_factor = 0.2
    max_factor = 10.0

    def __init__(self, rhs: Rhs, t, y, rtol, atol, h0=None, max_step=math.inf):
        self.rhs = rhs
        self.t = float(t)
        self.y = np.array(y, dtype=float)
        self.rtol, self.atol = rtol, atol
        self.max_step = max_step
        self.k1 = rhs(self.t, self.y)
        self.h = h0 if h0 is not None else self._initial_step()
        self.h = min(self.h, max_step)
        self.err_prev = 1e-4
        self.n_accepted = 0
        self.n_rejected = 0
        self.rhs_evals = 1

    def _initial_step(self):
        # Hairer, Norsett & Wanner starting-step heuristic
        scale = self.atol + self.rtol * np.abs(self.y)
        d0 = np.sqrt(np.mean((self.y / scale) ** 2))
        d1 = np.sqrt(np.mean((self.k1 / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        y1 = self.y + h0 * self.k1
        d2 = np.sqrt(np.mean(((self.rhs(self.t + h0, y1) - self.k1) / scale) ** 2)) / h0
        big = max(d1, d2)
        h1 = max(1e-6, h0 * 1e-3) if big <= 1e-15 else (0.01 / big) ** (1.0 / self.order)
        return min(100 * h0, h1)

    def trial(self, h):
        """Step of size ``h`` from the current point without committing it."""
        y_new, _, _ = dp45_step(self.rhs, self.t, self.y, h, self.k1)
        self.rhs_evals += 6
        return y_new

    def advance(self, h_limit=math.inf):
        """Take one accepted step no longer than ``h_limit``; returns the step used."""
        h = min(self.h, h_limit, self.max_step)
        while True:
            if h <= 16 * np.finfo(float).eps * max(1.0, abs(self.t)):
                raise IntegrationError(f"step size underflow at t={self.t:.17g} (h={h:.3e})")
            y_new, err, k_last = dp45_step(self.rhs, self.t, self.y, h, self.k1)
            self.rhs_evals += 6
            en = error_norm(err, self.y, y_new, self.rtol, self.atol)
            if en <= 1.0 and np.all(np.isfinite(y_new)):
                if en == 0.0:
                    factor = self.max_factor
                else:
                    factor = self.safety * en ** (-0.7 / self.order) * self.err_prev ** (0.4 / self.order)
                    factor = min(self.max_factor, max(self.min_factor, factor))
                self.err_prev = max(en, 1e-4)
                clipped = h_limit < min(self.h, self.max_step)
                # a step clipped by h_limit must not shrink the proposal
                self.h = max(h * factor, self.h) if clipped else h * factor
                self.t += h
                self.y = y_new
                self.k1 = k_last
                self.n_accepted += 1
                return h
            self.n_rejected += 1
            factor = self.safety * en ** (-1.0 / self.order) if np.isfinite(en) else self.min_factor
            h *= min(1.0, max(self.min_factor, factor))

    def reset(self, t, y):
        """Restart from a new point (after a state jump)."""
        self.t = float(t)
        self.y = np.array(y, dtype=float)
        self.k1 = self.rhs(self.t, self.y)
        self.rhs_evals += 1


def integrate_adaptive(rhs: Rhs, y0, config: IntegratorConfig, energy: Optional[EnergyFn] = None,
                       t0: float = 0.0) -> Trajectory:
    """Integrate with error control; every ``sample_stride``-th accepted step is kept."""
    st = AdaptiveStepper(rhs, t0, y0, config.rtol, config.atol, config.h0, config.max_step)
    t_final = t0 + config.t_end
    times = [st.t]
    states = [st.y.copy()]
    reason = "t_end"
    while st.t < t_final:
        remaining = t_final - st.t
        st.advance(remaining)
        if t_final - st.t <= 4 * np.finfo(float).eps * max(1.0, abs(t_final)):
            st.t = t_final
        stop = energy is not None and energy_termination(st.y, energy, config.energy_floor)
        if st.n_accepted % config.sample_stride == 0 or st.t >= t_final or stop:
            times.append(st.t)
            states.append(st.y.copy())
        if stop:
            reason = "energy_floor"
            break
    return Trajectory(np.array(times), np.array(states), {
        "method": "dopri5", "rtol": config.rtol, "atol": config.atol,
        "steps": st.n_accepted, "rejected": st.n_rejected, "rhs_evals": st.rhs_evals,
        "termination": reason,
    })
