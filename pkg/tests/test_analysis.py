import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from vibroimpact.analysis import (
    ConvergenceTable, ConvergenceRow, convergence_study, eigenfrequencies, eigenfrequency_check,
    locate_crossings, mse, physical_trajectory, point_mass_energy, spatial_mse_series,
    string_energy, string_energy_physical,
)
from vibroimpact.integrators import IntegrationError, IntegratorConfig, Trajectory, integrate_fixed
from vibroimpact.models import GalerkinStringModel, SdofModel
from vibroimpact.nonsmooth_core import ConstraintSet, ImpactLaw, IvanovSystem, sign_convention

samples = arrays(float, 12, elements=st.floats(-10, 10))


def traj_of(values, times=None):
    values = np.asarray(values, dtype=float)
    times = np.linspace(0, 1, len(values)) if times is None else times
    return Trajectory(times, values)


@given(samples)
def test_mse_identical_is_zero(v):
    assert mse(traj_of(v), traj_of(v)).e == 0.0


@given(samples, st.floats(-5, 5))
def test_mse_constant_offset(v, delta):
    rep = mse(traj_of(v), traj_of(v + delta), n=101)
    assert rep.e == pytest.approx(delta ** 2, rel=1e-9, abs=1e-12)
    assert rep.n == 101 and len(rep.times) == 101
    assert rep.times[0] == 0.0 and rep.times[-1] == 1.0


@given(samples, samples)
def test_mse_symmetric_nonnegative(a, b):
    e1 = mse(traj_of(a), traj_of(b)).e
    assert e1 >= 0
    assert e1 == mse(traj_of(b), traj_of(a)).e


def test_mse_rejects_uncovered_span():
    a = traj_of([0.0, 1.0])
    b = Trajectory([0.0, 0.5], [0.0, 1.0])
    with pytest.raises(ValueError):
        mse(a, b, span=(0.0, 1.0))
    assert mse(a, b).times[-1] == 0.5  # default span is the overlap


def test_mse_interpolates_linearly():
    a = Trajectory([0.0, 2.0], [0.0, 2.0])
    b = Trajectory([0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
    assert mse(a, b).e == 0.0


def test_spatial_mse_series():
    a = Trajectory([0.0, 1.0], [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    b = Trajectory([0.0, 1.0], [[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]])
    np.testing.assert_allclose(spatial_mse_series(a, b, [1, 2], [0.0, 0.5]), [2.5, 2.5])


def test_point_mass_energy():
    assert point_mass_energy(1.0, 0.0, 9.8) == pytest.approx(9.8)
    assert point_mass_energy(0.0, 0.0, 9.8) == 0.0


def test_string_energy_values():
    model = GalerkinStringModel(201, gamma=1.0)
    zero = np.zeros(201)
    assert string_energy(zero, zero, model) == 0.0
    a = 0.05 / math.sqrt(2)
    expected = 0.5 * math.pi ** 2 * a ** 2 + 0.25 * (math.pi ** 2 * a ** 2) ** 2
    e = string_energy_physical(model.sine_profile(0.05), zero, model)
    assert e == pytest.approx(expected, rel=1e-10)
    assert e == pytest.approx(6.2066e-3, rel=1e-4)


@given(arrays(float, 7, elements=st.floats(-0.1, 0.1)), arrays(float, 7, elements=st.floats(-1, 1)))
def test_string_energy_linear_is_quadratic(eta, etadot):
    model = GalerkinStringModel(7, gamma=0.0)
    quad = 0.5 * np.sum(etadot ** 2 + model.omega ** 2 * eta ** 2)
    assert string_energy(eta, etadot, model) == pytest.approx(quad, rel=1e-12, abs=1e-300)


def test_string_energy_rowwise():
    model = GalerkinStringModel(5)
    eta = np.array([[0.01, 0, 0, 0, 0], [0, 0.02, 0, 0, 0]])
    rows = string_energy(eta, np.zeros_like(eta), model)
    assert rows.shape == (2,)
    assert rows[1] == pytest.approx(string_energy(eta[1], np.zeros(5), model))


@given(arrays(float, 9, elements=st.floats(-0.02, 0.02)), arrays(float, 9, elements=st.floats(-1, 1)))
def test_string_energy_gradient(eta, etadot):
    """Central differences of E reproduce the modal equations."""
    model = GalerkinStringModel(9, gamma=1.0)
    h = 1e-6
    grad_eta, grad_dot = np.empty(9), np.empty(9)
    for j in range(9):
        e = np.zeros(9)
        e[j] = h
        grad_eta[j] = (string_energy(eta + e, etadot, model) - string_energy(eta - e, etadot, model)) / (2 * h)
        grad_dot[j] = (string_energy(eta, etadot + e, model) - string_energy(eta, etadot - e, model)) / (2 * h)
    force = -model.modal_rhs(eta, np.zeros(9))
    scale = max(np.max(np.abs(force)), 1e-3)
    assert np.max(np.abs(grad_eta - force)) / scale < 1e-6
    np.testing.assert_allclose(grad_dot, etadot, atol=1e-8)


def test_eigenfrequency_check_small_and_parameter_independent():
    assert eigenfrequency_check(GalerkinStringModel(1)) < 1e-15
    base = eigenfrequency_check(GalerkinStringModel(31))
    assert base < 1e-10
    assert eigenfrequency_check(GalerkinStringModel(31, gamma=5.0, c=0.3)) == base


def test_eigenfrequencies_reject_bad_stiffness():
    asym = SimpleNamespace(linear_stiffness=lambda: np.array([[1.0, 2.0], [0.0, 1.0]]), omega=np.ones(2))
    with pytest.raises(np.linalg.LinAlgError, match="symmetric"):
        eigenfrequencies(asym)
    indef = SimpleNamespace(linear_stiffness=lambda: np.diag([1.0, -1.0]), omega=np.ones(2))
    with pytest.raises(np.linalg.LinAlgError, match="positive"):
        eigenfrequencies(indef)


# -- crossings on SDOF Ivanov runs -------------------------------------------------------------


def sdof_run(R, dt, t_end=10.0):
    model = SdofModel(1.0, 1.0, 0.0, 0.5)
    sys_ = IvanovSystem(model.accel, ConstraintSet.single(0.5), ImpactLaw(R))
    traj = integrate_fixed(sys_.rhs, sys_.initial_state([1.0], [0.0]), IntegratorConfig(dt=dt, t_end=t_end))
    return sys_, traj


@pytest.mark.parametrize("R", [1.0, 0.8, 0.5])
def test_velocity_jump_at_crossings(R):
    sys_, traj = sdof_run(R, 1e-3)
    crossings = locate_crossings(sys_, traj)
    assert crossings
    for c in crossings:
        assert c.ratio == pytest.approx(-R, rel=1e-12)
    # sample resolution: within 10 dt |zeta'| of the jump law
    for c in locate_crossings(sys_, traj, interpolate=False):
        zdot = abs(sys_.rhs(c.t, traj.states[c.sample])[1])
        assert abs(c.v_plus + R * c.v_minus) <= 10 * 1e-3 * zdot * max(1.0, 1 / (1 - sys_.law.k))


def test_quadrant_cycle():
    sys_, traj = sdof_run(0.7, 1e-3)
    eta, zeta = traj.states[:, 0], traj.states[:, 1]
    sg = sign_convention(eta)
    idx = np.flatnonzero(sg[1:] != sg[:-1])
    # once impacts accumulate (the mass settles on the stop) zeta changes sign within single
    # steps; only crossings where |zeta| exceeds what 10 steps can change are resolved
    zdot_max = np.max(np.abs([sys_.rhs(0.0, y)[1] for y in traj.states]))
    resolved = [j for j in idx if min(abs(zeta[j]), abs(zeta[j + 1])) > 10 * 1e-3 * zdot_max]
    assert len(resolved) >= 5 and resolved[:5] == list(idx[:5])
    for j in resolved:
        before, after = (sg[j], sign_convention(zeta[j])), (sg[j + 1], sign_convention(zeta[j + 1]))
        # IV -> III or II -> I
        assert (before, after) in {((1, -1), (-1, -1)), ((-1, 1), (1, 1))}


def test_transformed_state_continuity():
    jumps = []
    for dt in (1e-2, 1e-3):
        _, traj = sdof_run(0.8, dt)
        jumps.append(np.max(np.abs(np.diff(traj.states, axis=0))))
    assert jumps[1] < 0.2 * jumps[0]


def test_physical_trajectory_layout():
    sys_, traj = sdof_run(1.0, 1e-2, t_end=1.0)
    phys = physical_trajectory(sys_, traj)
    assert phys.states.shape == (len(traj), 2)
    assert phys.metadata["coordinates"] == "physical"
    assert phys.states[0, 0] == 1.0


# -- convergence tables ------------------------------------------------------------------------


def test_convergence_study_records_divergence_and_self_reference():
    ref = integrate_fixed(lambda t, y: -y, [1.0], IntegratorConfig(dt=1e-3, t_end=1.0))

    def run(dt):
        if dt > 0.5:
            raise IntegrationError("non-finite state")
        if dt == 1e-3:
            return ref
        return integrate_fixed(lambda t, y: -y, [1.0], IntegratorConfig(dt=dt, t_end=1.0))

    table = convergence_study(run, [1e-3, 1e-2, 1e-1, 1.0], ref)
    assert table.rows[0].e == 0.0
    assert table.rows[-1].e == math.inf and table.rows[-1].status.startswith("diverged")
    assert table.increasing_in_dt()
    assert "1 diverged" in table.summary()


def test_convergence_table_trend():
    table = ConvergenceTable([ConvergenceRow(0.1, 1e-3), ConvergenceRow(0.01, 1e-2)])
    assert not table.increasing_in_dt()
    assert "not monotone" in table.summary()
