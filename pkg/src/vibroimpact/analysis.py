"""Post-processing: MSE, energies, crossing detection, eigenfrequencies, dt sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .integrators import IntegrationError, Trajectory
from .models import GalerkinStringModel
from .nonsmooth_core import IvanovSystem, sign_convention


@dataclass
class MseReport:
    n: int
    times: np.ndarray
    squared_errors: np.ndarray
    e: float


def _series(traj: Trajectory, component, times):
    if callable(component):
        return np.asarray(component(traj, times), dtype=float)
    return traj.at(times, component)


def mse(reference: Trajectory, candidate: Trajectory, component=0, n: int = 101,
        span: tuple[float, float] | None = None, reference_component=None) -> MseReport:
    """Mean squared difference of one component at ``n`` equally spaced times (ends included).

    ``component`` is a state column index or ``f(traj, times) -> values``;
    ``reference_component`` (default: the same) is used for ``reference``
    when the two trajectories store different state layouts.
    Both series are linearly interpolated.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if span is None:
        span = (max(reference.span[0], candidate.span[0]), min(reference.span[1], candidate.span[1]))
    t0, t1 = span
    for name, tr in (("reference", reference), ("candidate", candidate)):
        lo, hi = tr.span
        # tolerate last-bit differences in the final time
        slack = 1e-12 * max(1.0, abs(hi))
        if t0 < lo - slack or t1 > hi + slack:
            raise ValueError(f"span {span} not covered by {name} trajectory [{lo}, {hi}]")
    times = np.linspace(t0, t1, n)
    ref_component = component if reference_component is None else reference_component
    a = _series(reference, ref_component, np.clip(times, *reference.span))
    b = _series(candidate, component, np.clip(times, *candidate.span))
    sq = (a - b) ** 2
    return MseReport(n, times, sq, float(np.mean(sq)))


def spatial_mse_series(reference: Trajectory, candidate: Trajectory, columns, times) -> np.ndarray:
    """``e(t)``: mean over ``columns`` of the squared difference, at each of ``times``."""
    columns = np.asarray(columns)
    a = np.stack([reference.at(times, j) for j in columns], axis=-1)
    b = np.stack([candidate.at(times, j) for j in columns], axis=-1)
    return np.mean((a - b) ** 2, axis=-1)


def physical_trajectory(system: IvanovSystem, traj: Trajectory) -> Trajectory:
    """Map a transformed trajectory to full physical states ``[x, xdot]``."""
    x, xdot = system.physical(traj.states)
    meta = dict(traj.metadata)
    meta["coordinates"] = "physical"
    return Trajectory(traj.times, np.hstack([x, xdot]), meta)


def point_mass_energy(u, v, g):
    return 0.5 * np.asarray(v) ** 2 + g * np.asarray(u)


def string_energy(eta, etadot, model: GalerkinStringModel):
    """``1/2 sum(etadot^2 + omega^2 eta^2) + gamma/4 S^2`` with ``S = sum(omega^2 eta^2)``.

    Arrays with a leading sample axis are handled row-wise.
    """
    eta = np.asarray(eta, dtype=float)
    etadot = np.asarray(etadot, dtype=float)
    w2 = model.omega ** 2
    S = np.sum(w2 * eta ** 2, axis=-1)
    return 0.5 * np.sum(etadot ** 2, axis=-1) + 0.5 * S + 0.25 * model.gamma * S ** 2


def string_energy_physical(p, pdot, model: GalerkinStringModel):
    p = np.asarray(p, dtype=float)
    pdot = np.asarray(pdot, dtype=float)
    return string_energy(p @ model.PhiT_inv.T, pdot @ model.PhiT_inv.T, model)


def eigenfrequencies(model: GalerkinStringModel, sym_tol: float = 1e-9):
    """Return ``(omega_m, omega_s)``: modal frequencies and those of the physical stiffness."""
    K = model.linear_stiffness()
    scale = np.max(np.abs(K))
    asym = np.max(np.abs(K - K.T)) / scale
    if asym > sym_tol:
        raise np.linalg.LinAlgError(f"physical stiffness is not symmetric (rel. asymmetry {asym:.2e})")
    lam = np.linalg.eigvalsh(0.5 * (K + K.T))
    if lam[0] <= 0:
        raise np.linalg.LinAlgError(f"physical stiffness is not positive definite (min eig {lam[0]:.3e})")
    return np.array(model.omega), np.sqrt(lam)


def eigenfrequency_check(model: GalerkinStringModel) -> float:
    omega_m, omega_s = eigenfrequencies(model)
    return float(np.max(np.abs(omega_s - omega_m) / omega_m))


@dataclass
class Crossing:
    coordinate: int
    t: float
    v_minus: float
    v_plus: float
    sample: int

    @property
    def ratio(self) -> float:
        return self.v_plus / self.v_minus


def locate_crossings(system: IvanovSystem, traj: Trajectory, interpolate: bool = True) -> list[Crossing]:
    """Zero crossings of every transformed displacement ``eta_i`` (i.e. impacts).

    With ``interpolate`` the crossing time and ``zeta`` are linearly
    interpolated inside the bracketing samples and the physical velocities on
    either side follow from the quadrant of each side. Otherwise the
    reconstructed velocities at the two bracketing samples are returned.
    """
    m = system.m
    eta = traj.states[:, :m]
    zeta = traj.states[:, m:2 * m]
    sg = sign_convention(eta)
    _, xdot = system.physical(traj.states)
    vel = xdot[:, system.cs.constrained_indices]
    k = system.law.k
    rows, cols = np.nonzero(sg[1:] != sg[:-1])
    out = []
    for j, i in zip(rows, cols):
        t_a, t_b = traj.times[j], traj.times[j + 1]
        if interpolate:
            e_a, e_b = eta[j, i], eta[j + 1, i]
            theta = e_a / (e_a - e_b) if e_a != e_b else 0.0
            t_c = t_a + theta * (t_b - t_a)
            z_c = zeta[j, i] + theta * (zeta[j + 1, i] - zeta[j, i])
            sz = sign_convention(z_c)
            s_a, s_b = sg[j, i], sg[j + 1, i]
            v_minus = (1.0 - k * s_a * sz) * s_a * z_c
            v_plus = (1.0 - k * s_b * sz) * s_b * z_c
        else:
            t_c = 0.5 * (t_a + t_b)
            v_minus, v_plus = vel[j, i], vel[j + 1, i]
        out.append(Crossing(int(system.cs.constrained_indices[i]), float(t_c),
                            float(v_minus), float(v_plus), int(j)))
    out.sort(key=lambda c: (c.t, c.coordinate))
    return out


@dataclass
class ConvergenceRow:
    dt: float
    e: float
    status: str = "ok"
    extra: dict = field(default_factory=dict)


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]

    @property
    def dts(self):
        return np.array([r.dt for r in self.rows])

    @property
    def errors(self):
        return np.array([r.e for r in self.rows])

    def increasing_in_dt(self) -> bool:
        """Errors ordered by dt never decrease (diverged runs count as +inf)."""
        e = self.errors[np.argsort(self.dts)]
        return bool(np.all(e[1:] >= e[:-1]))

    def summary(self) -> str:
        finite = [r for r in self.rows if math.isfinite(r.e)]
        trend = "non-decreasing in dt" if self.increasing_in_dt() else "not monotone in dt"
        best = min(finite, key=lambda r: r.e) if finite else None
        best_txt = f"; smallest e={best.e:.3e} at dt={best.dt:g}" if best else ""
        return f"{len(self.rows)} rows, {len(self.rows) - len(finite)} diverged; {trend}{best_txt}"


def convergence_study(run: Callable[[float], Trajectory], dts: Sequence[float], reference: Trajectory,
                      component=0, n: int = 101, span=None) -> ConvergenceTable:
    """Run ``run(dt)`` for each dt and score it against ``reference`` with :func:`mse`.

    A run that aborts numerically is recorded with ``e = inf`` and the message
    as status; the sweep continues.
    """
    rows = []
    for dt in dts:
        try:
            traj = run(dt)
            e = mse(reference, traj, component, n, span).e
            rows.append(ConvergenceRow(float(dt), e if math.isfinite(e) else math.inf,
                                       "ok" if math.isfinite(e) else "diverged: non-finite error"))
        except (IntegrationError, FloatingPointError, OverflowError) as exc:
            rows.append(ConvergenceRow(float(dt), math.inf, f"diverged: {exc}"))
    return ConvergenceTable(rows)
