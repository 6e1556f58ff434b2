"""Dynamical systems: bouncing point mass, SDOF impact oscillator, nonlinear string.

Every model exposes accelerations in physical coordinates. The string is a
Galerkin truncation on the sine modes ``phi_j(x) = sqrt(2) sin(j pi x)``,
mapped to grid displacements ``p = Phi^T eta`` on the interior grid
``x_i = i / (N + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .nonsmooth_core import ConstraintSet

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class PointMassModel:
    g_grav: float = 9.8

    def __post_init__(self):
        if not self.g_grav > 0:
            raise ValueError(f"g_grav must be positive, got {self.g_grav!r}")

    def rhs(self, u, v, t=0.0):
        return -self.g_grav * np.ones_like(np.asarray(u, dtype=float))

    def accel(self, x, xdot, t):
        if np.ndim(x) == 0:
            return -self.g_grav
        return np.full(np.shape(x), -self.g_grav)

    def energy(self, u, v):
        return 0.5 * np.asarray(v) ** 2 + self.g_grav * np.asarray(u)


def point_mass_rhs(u, v, t, model: PointMassModel = PointMassModel()):
    return model.rhs(u, v, t)


@dataclass(frozen=True)
class SdofModel:
    """``m p'' + c p' + k_s p = 0`` with a rigid obstacle at ``p = d``."""

    m: float = 1.0
    k_s: float = 1.0
    c: float = 0.0
    d: float = 0.5

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m!r}")
        if self.k_s < 0 or self.c < 0:
            raise ValueError("k_s and c must be non-negative")

    def rhs(self, u, v, t=0.0):
        """Acceleration in the shifted coordinate ``u = p - d``."""
        return -(self.k_s * (u + self.d) + self.c * v) / self.m

    def accel(self, x, xdot, t):
        """Acceleration in the unshifted displacement ``p``."""
        return -(self.k_s * x + self.c * xdot) / self.m

    def energy(self, p, pdot):
        return 0.5 * self.m * np.asarray(pdot) ** 2 + 0.5 * self.k_s * np.asarray(p) ** 2


def sdof_rhs(u, v, t, model: SdofModel):
    return model.rhs(u, v, t)


def mode_shape(j, x):
    return SQRT2 * np.sin(np.multiply(j, np.pi) * np.asarray(x, dtype=float))


def build_phi(N: int, tol: float = 1e-10):
    """Return ``(Phi, PhiT_inv, grid)`` with ``Phi[j-1, i-1] = phi_j(x_i)``.

    Raises ``np.linalg.LinAlgError`` if ``Phi^T @ PhiT_inv`` misses the identity
    by ``tol`` or more anywhere.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N!r}")
    grid = np.arange(1, N + 1) / (N + 1)
    modes = np.arange(1, N + 1)
    phi = mode_shape(modes[:, None], grid[None, :])
    phit_inv = np.linalg.inv(phi.T)
    dev = np.max(np.abs(phi.T @ phit_inv - np.eye(N)))
    if not dev < tol:
        raise np.linalg.LinAlgError(
            f"modal-physical transform ill-conditioned for N={N}: "
            f"max |Phi^T Phi^-T - I| = {dev:.3e} >= {tol:g}"
        )
    return phi, phit_inv, grid


@dataclass(frozen=True, eq=False)
class GalerkinStringModel:
    """Nondimensional nonlinear string with ``N`` modes on ``N`` grid points."""

    N: int
    gamma: float = 1.0
    c: float = 0.0
    omega: np.ndarray = field(init=False, repr=False)
    Phi: np.ndarray = field(init=False, repr=False)
    PhiT_inv: np.ndarray = field(init=False, repr=False)
    grid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("damping must be non-negative")
        phi, phit_inv, grid = build_phi(self.N)
        omega = np.pi * np.arange(1, self.N + 1)
        for name, arr in (("omega", omega), ("Phi", phi), ("PhiT_inv", phit_inv), ("grid", grid)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        # pi^2 k^2 weights of the stretching integral, equal to omega^2
        object.__setattr__(self, "_omega2", omega ** 2)

    @property
    def midpoint_index(self) -> int:
        """Grid index closest to ``x = 1/2`` (exact for odd N)."""
        return int(np.argmin(np.abs(self.grid - 0.5)))

    def stretch(self, eta):
        return np.dot(self._omega2, np.asarray(eta) ** 2)

    def modal_rhs(self, eta, etadot, t=0.0):
        S = self.stretch(eta)
        return -(1.0 + self.gamma * S) * self._omega2 * eta - self.c * etadot

    def to_modal(self, p):
        return self.PhiT_inv @ p

    def to_physical(self, eta):
        return self.Phi.T @ eta

    def physical_rhs(self, p, pdot, t=0.0):
        eta = self.PhiT_inv @ p
        S = self.stretch(eta)
        return -(self.Phi.T @ ((1.0 + self.gamma * S) * self._omega2 * eta)) - self.c * pdot

    accel = physical_rhs

    def linear_stiffness(self) -> np.ndarray:
        """Physical-coordinate stiffness ``Phi^T diag(omega^2) Phi^-T`` at the origin."""
        return self.Phi.T @ (self._omega2[:, None] * self.PhiT_inv)

    def sine_profile(self, amplitude: float = 0.05, j: int = 1):
        """Grid samples of ``amplitude * sin(j pi x)``."""
        return amplitude * np.sin(j * np.pi * self.grid)


@dataclass(frozen=True)
class ObstacleProfile:
    """Rigid obstacle ``y >= d(x)`` on ``support = (a, b)``.

    kind ``flat``: ``d = level``.
    kind ``sinusoidal``: ``d = offset - amplitude * sin(pi * (x - phase))``.
    kind ``custom``: ``d = func(x)``.
    """

    kind: str = "flat"
    support: tuple[float, float] = (1.0 / 3.0, 2.0 / 3.0)
    level: float = 0.025
    offset: float = 0.05
    amplitude: float = 0.025
    phase: float = 1.0 / 3.0
    func: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("flat", "sinusoidal", "custom"):
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom obstacle needs a func")
        a, b = self.support
        if not a <= b:
            raise ValueError(f"empty obstacle support {self.support!r}")

    @classmethod
    def flat(cls, level=0.025, support=(1.0 / 3.0, 2.0 / 3.0)):
        return cls("flat", support=support, level=level)

    @classmethod
    def sinusoidal(cls, offset=0.05, amplitude=0.025, phase=1.0 / 3.0, support=(1.0 / 3.0, 1.0)):
        # printed upper bound 4/3 lies outside the string; clamped to 1
        return cls("sinusoidal", support=support, offset=offset, amplitude=amplitude, phase=phase)

    def height(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "flat":
            return np.full(x.shape, float(self.level))
        if self.kind == "sinusoidal":
            return self.offset - self.amplitude * np.sin(np.pi * (x - self.phase))
        return np.asarray(self.func(x), dtype=float) * np.ones(x.shape)

    def contains(self, x):
        a, b = self.support
        # slack absorbs the rounding in i/(N+1) for grid points on the boundary
        eps = 1e-12
        x = np.asarray(x, dtype=float)
        return (x >= a - eps) & (x <= b + eps)


def sample_obstacle(ob: ObstacleProfile | None, grid) -> ConstraintSet:
    grid = np.asarray(grid, dtype=float)
    if np.any((grid <= 0) | (grid >= 1)):
        raise ValueError("grid must lie strictly inside (0, 1)")
    if ob is None:
        return ConstraintSet([], [], grid.size)
    idx = np.flatnonzero(ob.contains(grid))
    gaps = ob.height(grid[idx])
    if not np.all(np.isfinite(gaps)):
        raise ValueError("obstacle height is not finite on its support")
    return ConstraintSet(idx, gaps, grid.size)


def nondimensionalize(rho, L, A, T0, E, C, H, D):
    """Map dimensional string data to ``(gamma, c, d, alpha)``.

    ``D`` may be a number, an array or a callable of the dimensional position;
    a callable yields a callable ``d(x)`` of the nondimensional position.
    """
    for name, val in (("rho", rho), ("L", L), ("T0", T0), ("H", H)):
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val!r}")
    gamma = E * A * H ** 2 / (2.0 * T0 * L ** 2)
    alpha = np.sqrt(rho * L ** 2 / T0)
    c = C * alpha / rho
    if callable(D):
        def d(x):
            return (H - D(np.asarray(x) * L)) / H
    else:
        d = (H - np.asarray(D, dtype=float)) / H
        if d.ndim == 0:
            d = float(d)
    return gamma, c, d, alpha
