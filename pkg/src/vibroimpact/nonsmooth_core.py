"""Nonsmooth coordinate transformation for systems with unilateral constraints.

A subset of the displacement coordinates ``p`` obeys ``p_i >= d_i`` with the
impact law ``pdot_i(t+) = -R pdot_i(t-)``; the rest (``q``) are free. With
``u = p - d`` and ``v = pdot`` the change of variables

    u = T eta,   v = W zeta
    T = diag(sgn(eta))
    W = diag((1 - k sgn(eta * zeta)) * sgn(eta)),   k = (1 - R) / (1 + R)

maps the constrained, jumping dynamics onto an unconstrained ODE in
``(eta, zeta, r, s)`` whose solutions are continuous in time. All diagonal
matrices are kept as 1-D arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# f(p, pdot, q, qdot, t) -> constrained accelerations; g(...) -> free ones
AccelFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float], np.ndarray]
# full-vector form: accel(x, xdot, t) with x ordered by original coordinate
FullAccelFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


class ConstraintViolation(ValueError):
    """Raised when a physical state already violates ``p_i >= d_i``."""


@dataclass(frozen=True)
class ImpactLaw:
    """Coefficient of restitution ``R`` and the derived ``k = (1-R)/(1+R)``."""

    R: float

    def __post_init__(self):
        R = float(self.R)
        if not np.isfinite(R) or R <= 0.0 or R > 1.0:
            raise ValueError(
                f"coefficient of restitution must satisfy 0 < R <= 1, got R={self.R!r} "
                "(R <= 0 gives k >= 1 and a singular velocity transform)"
            )
        object.__setattr__(self, "R", R)

    @property
    def k(self) -> float:
        return (1.0 - self.R) / (1.0 + self.R)

    @classmethod
    def from_k(cls, k: float) -> "ImpactLaw":
        if not 0.0 <= k < 1.0:
            raise ValueError(f"k must satisfy 0 <= k < 1, got {k!r}")
        return cls((1.0 - k) / (1.0 + k))


@dataclass(frozen=True)
class ConstraintSet:
    """Which coordinates are constrained (``p_i >= d_i``) in a system of size ``dim``."""

    constrained_indices: np.ndarray
    gaps: np.ndarray
    dim: int
    free_indices: np.ndarray = field(init=False)

    def __init__(self, constrained_indices: Sequence[int], gaps, dim: int):
        idx = np.asarray(constrained_indices, dtype=np.intp).reshape(-1)
        d = np.asarray(gaps, dtype=float).reshape(-1)
        if idx.shape != d.shape:
            raise ValueError(f"{idx.size} constrained indices but {d.size} gaps")
        if dim < 0:
            raise ValueError("dim must be non-negative")
        if np.unique(idx).size != idx.size:
            raise ValueError("constrained indices must be unique")
        if idx.size and (idx.min() < 0 or idx.max() >= dim):
            raise ValueError(f"constrained indices must lie in [0, {dim})")
        if not np.all(np.isfinite(d)):
            raise ValueError("gaps must be finite")
        free = np.setdiff1d(np.arange(dim, dtype=np.intp), idx)
        for name, arr in (("constrained_indices", idx), ("gaps", d), ("free_indices", free)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "dim", int(dim))

    @property
    def m(self) -> int:
        return int(self.constrained_indices.size)

    @property
    def n(self) -> int:
        return int(self.free_indices.size)

    @classmethod
    def single(cls, gap: float = 0.0) -> "ConstraintSet":
        """One constrained coordinate and nothing else (point mass, SDOF)."""
        return cls([0], [gap], 1)


@dataclass
class TransformedState:
    eta: np.ndarray
    zeta: np.ndarray
    r: np.ndarray
    s: np.ndarray

    def pack(self) -> np.ndarray:
        return np.concatenate([self.eta, self.zeta, self.r, self.s])

    @classmethod
    def unpack(cls, y: np.ndarray, m: int, n: int) -> "TransformedState":
        y = np.asarray(y, dtype=float)
        return cls(y[:m], y[m:2 * m], y[2 * m:2 * m + n], y[2 * m + n:2 * m + 2 * n])


@dataclass
class PhysicalState:
    p: np.ndarray
    pdot: np.ndarray
    q: np.ndarray
    qdot: np.ndarray

    def full(self, cs: ConstraintSet) -> tuple[np.ndarray, np.ndarray]:
        """Scatter into displacement and velocity vectors of length ``cs.dim``."""
        x = np.empty(cs.dim)
        xdot = np.empty(cs.dim)
        x[cs.constrained_indices] = self.p
        x[cs.free_indices] = self.q
        xdot[cs.constrained_indices] = self.pdot
        xdot[cs.free_indices] = self.qdot
        return x, xdot

    @classmethod
    def from_full(cls, x, xdot, cs: ConstraintSet) -> "PhysicalState":
        x = np.asarray(x, dtype=float)
        xdot = np.asarray(xdot, dtype=float)
        c, f = cs.constrained_indices, cs.free_indices
        return cls(x[c], xdot[c], x[f], xdot[f])


def sign_convention(x):
    """Sign with ``sgn(0) = +1``, so that T and W stay invertible on the contact set.

    Works elementwise on arrays; never returns 0.
    """
    if np.ndim(x) == 0:
        return 1.0 if x >= 0 else -1.0
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def build_T(eta) -> np.ndarray:
    """Diagonal of T; T is its own inverse."""
    return sign_convention(np.atleast_1d(np.asarray(eta, dtype=float)))


def build_W(eta, zeta, law: ImpactLaw | float) -> np.ndarray:
    """Diagonal of W. ``law`` may be an ImpactLaw or the raw parameter ``k``."""
    k = law.k if isinstance(law, ImpactLaw) else float(law)
    if not 0.0 <= k < 1.0:
        raise ValueError(f"transformation is singular for k={k!r}; need 0 <= k < 1")
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    # sgn(eta*zeta) == sgn(eta)*sgn(zeta) under the +1 convention, and avoids
    # underflow of the product to 0 flipping the quadrant
    sgn_eta = sign_convention(eta)
    return (1.0 - k * sgn_eta * sign_convention(zeta)) * sgn_eta


def to_physical(ts: TransformedState, cs: ConstraintSet, law: ImpactLaw) -> PhysicalState:
    t_diag = build_T(ts.eta)
    w_diag = build_W(ts.eta, ts.zeta, law)
    return PhysicalState(
        p=t_diag * ts.eta + cs.gaps,
        pdot=w_diag * ts.zeta,
        q=np.array(ts.r, dtype=float),
        qdot=np.array(ts.s, dtype=float),
    )


def to_transformed(ps: PhysicalState, cs: ConstraintSet, law: ImpactLaw) -> TransformedState:
    """Initial-condition map ``eta = T^-1 (p - d)``, ``zeta = W^-1 pdot``.

    Since ``u = p - d >= 0`` the branch ``T = +1`` is taken for every
    constrained coordinate; ``W`` is then fixed by the sign of ``pdot``.
    """
    p = np.atleast_1d(np.asarray(ps.p, dtype=float))
    pdot = np.atleast_1d(np.asarray(ps.pdot, dtype=float))
    u = p - cs.gaps
    bad = np.flatnonzero(u < 0)
    if bad.size:
        i = bad[0]
        raise ConstraintViolation(
            f"constraint violated at coordinate {int(cs.constrained_indices[i])}: "
            f"p={p[i]!r} < d={cs.gaps[i]!r}"
        )
    eta = u.copy()
    # T = +1, so sgn(eta*zeta) = sgn(zeta) = sgn(pdot)
    zeta = pdot / build_W(eta, pdot, law)
    return TransformedState(eta, zeta, np.array(ps.q, dtype=float), np.array(ps.qdot, dtype=float))


def _derivative(eta, zeta, r, s, t, cs, k, accel):
    t_diag = sign_convention(eta)
    w_diag = (1.0 - k * t_diag * sign_convention(zeta)) * t_diag
    p = t_diag * eta + cs.gaps
    pdot = w_diag * zeta
    f, g = accel(p, pdot, r, s, t)
    # T^-1 = T
    return t_diag * w_diag * zeta, f / w_diag, s, g


def transformed_rhs(f: AccelFn, g: AccelFn, ts: TransformedState, t: float,
                    cs: ConstraintSet, law: ImpactLaw) -> TransformedState:
    """Time derivative of ``(eta, zeta, r, s)``; f and g are each called once."""
    k = law.k

    def accel(p, pdot, q, qdot, tt):
        return f(p, pdot, q, qdot, tt), g(p, pdot, q, qdot, tt)

    d_eta, d_zeta, d_r, d_s = _derivative(
        np.asarray(ts.eta, dtype=float), np.asarray(ts.zeta, dtype=float),
        np.asarray(ts.r, dtype=float), np.asarray(ts.s, dtype=float), t, cs, k, accel)
    return TransformedState(d_eta, np.asarray(d_zeta, dtype=float),
                            np.array(d_r, dtype=float), np.asarray(d_s, dtype=float))


def s_matrix(eta: float, zeta: float, law: ImpactLaw) -> np.ndarray:
    """2x2 map ``(u, v) = S (eta, zeta)`` for a single constrained coordinate."""
    return np.diag([build_T(eta)[0], build_W(eta, zeta, law)[0]])


class IvanovSystem:
    """Transformed first-order system for one model and constraint set.

    ``accel(x, xdot, t)`` returns accelerations of the full coordinate vector
    (length ``cs.dim``); it is evaluated once per right-hand-side call. The
    packed integration state is ``[eta, zeta, r, s]``.
    """

    def __init__(self, accel: FullAccelFn, cs: ConstraintSet, law: ImpactLaw):
        self.accel = accel
        self.cs = cs
        self.law = law
        self._k = law.k
        self._x = np.empty(cs.dim)
        self._xdot = np.empty(cs.dim)
        if cs.m == 1 and cs.n == 0:
            self._gap = float(cs.gaps[0])
            self.rhs = self._rhs_scalar

    def _rhs_scalar(self, t, y):
        # same equations as rhs() for one constrained coordinate, on Python floats
        eta, zeta = float(y[0]), float(y[1])
        s_eta = 1.0 if eta >= 0 else -1.0
        w = (1.0 - self._k * s_eta * (1.0 if zeta >= 0 else -1.0)) * s_eta
        a = float(self.accel(s_eta * eta + self._gap, w * zeta, t))
        return np.array([s_eta * w * zeta, a / w])

    @property
    def m(self) -> int:
        return self.cs.m

    @property
    def n(self) -> int:
        return self.cs.n

    def _full_accel(self, p, pdot, q, qdot, t):
        c, fr = self.cs.constrained_indices, self.cs.free_indices
        x, xdot = self._x.copy(), self._xdot.copy()
        x[c] = p
        x[fr] = q
        xdot[c] = pdot
        xdot[fr] = qdot
        a = np.asarray(self.accel(x, xdot, t), dtype=float)
        return a[c], a[fr]

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        m, n = self.m, self.n
        parts = _derivative(y[:m], y[m:2 * m], y[2 * m:2 * m + n], y[2 * m + n:],
                            t, self.cs, self._k, self._full_accel)
        return np.concatenate(parts)

    def initial_state(self, x0, xdot0) -> np.ndarray:
        """Pack the transformed initial state from full physical vectors."""
        ps = PhysicalState.from_full(np.atleast_1d(x0), np.atleast_1d(xdot0), self.cs)
        return to_transformed(ps, self.cs, self.law).pack()

    def physical(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reconstruct full displacements and velocities for packed state rows.

        Accepts a single packed state or an array of shape ``(samples, 2m+2n)``.
        """
        states = np.asarray(states, dtype=float)
        single = states.ndim == 1
        states = np.atleast_2d(states)
        m, n = self.m, self.n
        eta, zeta = states[:, :m], states[:, m:2 * m]
        t_diag = sign_convention(eta)
        w_diag = (1.0 - self._k * t_diag * sign_convention(zeta)) * t_diag
        x = np.empty((states.shape[0], self.cs.dim))
        xdot = np.empty_like(x)
        c, fr = self.cs.constrained_indices, self.cs.free_indices
        x[:, c] = t_diag * eta + self.cs.gaps
        xdot[:, c] = w_diag * zeta
        x[:, fr] = states[:, 2 * m:2 * m + n]
        xdot[:, fr] = states[:, 2 * m + n:]
        if single:
            return x[0], xdot[0]
        return x, xdot

    def min_gap(self, states: np.ndarray) -> float:
        """min over samples and constrained coordinates of ``p_i - d_i``."""
        if self.m == 0:
            return float("inf")
        x, _ = self.physical(np.atleast_2d(states))
        return float(np.min(x[:, self.cs.constrained_indices] - self.cs.gaps))
