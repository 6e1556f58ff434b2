import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vibroimpact.integrators import (
    AdaptiveStepper, IntegrationError, IntegratorConfig, Trajectory, energy_termination,
    integrate_adaptive, integrate_fixed, rk4_step, step_count,
)
from vibroimpact.models import PointMassModel
from vibroimpact.nonsmooth_core import ConstraintSet, ImpactLaw, IvanovSystem


def decay(t, y):
    return -y


def harmonic(t, y):
    return np.array([y[1], -y[0]])


def test_rk4_exponential_step():
    y = rk4_step(decay, np.array([1.0]), 0.0, 0.1)
    assert abs(y[0] - math.exp(-0.1)) < 1e-7
    assert y[0] == pytest.approx(0.90483742, abs=1e-7)


def test_rk4_zero_rhs_and_eval_count():
    calls = []

    def zero(t, y):
        calls.append(t)
        return np.zeros_like(y)

    y0 = np.array([1.0, -2.0])
    assert np.array_equal(rk4_step(zero, y0, 0.0, 0.3), y0)
    assert len(calls) == 4


def test_rk4_observed_order():
    def final_error(dt):
        traj = integrate_fixed(harmonic, [1.0, 0.0], IntegratorConfig(dt=dt, t_end=5.0))
        return abs(traj.states[-1, 0] - math.cos(5.0))

    dts = [0.1, 0.05, 0.025, 0.0125]
    errs = [final_error(dt) for dt in dts]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 3.9


def test_fixed_zero_rhs_sample_count():
    cfg = IntegratorConfig(dt=0.1, t_end=1.0)
    traj = integrate_fixed(lambda t, y: np.zeros_like(y), [3.0], cfg)
    assert len(traj) == math.ceil(1.0 / 0.1) + 1
    assert np.all(traj.states == 3.0)
    assert traj.times[-1] == 1.0


def test_fixed_lands_on_t_end_with_short_last_step():
    traj = integrate_fixed(decay, [1.0], IntegratorConfig(dt=0.3, t_end=1.0))
    np.testing.assert_allclose(traj.times, [0.0, 0.3, 0.6, 0.9, 1.0], rtol=0, atol=1e-15)
    assert traj.metadata["steps"] == 4


def test_fixed_stride_keeps_final_state():
    traj = integrate_fixed(decay, [1.0], IntegratorConfig(dt=0.01, t_end=1.0, sample_stride=7))
    assert traj.times[-1] == 1.0
    assert np.allclose(np.diff(traj.times[:-1]), 0.07)


def test_fixed_aborts_on_non_finite():
    with pytest.raises(IntegrationError, match="step"), np.errstate(over="ignore"):
        integrate_fixed(lambda t, y: y ** 2, [1.0], IntegratorConfig(dt=0.5, t_end=50.0))


def test_fixed_deterministic():
    sys_ = IvanovSystem(PointMassModel().accel, ConstraintSet.single(0.0), ImpactLaw(0.9))
    cfg = IntegratorConfig(dt=1e-3, t_end=2.0)
    a = integrate_fixed(sys_.rhs, [1.0, 0.0], cfg)
    b = integrate_fixed(sys_.rhs, [1.0, 0.0], cfg)
    assert np.array_equal(a.times, b.times) and np.array_equal(a.states, b.states)


def test_adaptive_exponential():
    traj = integrate_adaptive(decay, [1.0], IntegratorConfig(t_end=10.0, rtol=1e-12, atol=1e-12))
    err = np.max(np.abs(traj.states[:, 0] - np.exp(-traj.times)))
    assert err < 1e-10


def test_adaptive_harmonic_energy_drift():
    traj = integrate_adaptive(harmonic, [1.0, 0.0],
                              IntegratorConfig(t_end=20 * math.pi, rtol=1e-12, atol=1e-12))
    energy = 0.5 * np.sum(traj.states ** 2, axis=1)
    assert np.max(np.abs(energy - 0.5)) < 1e-9
    assert traj.times[-1] == 20 * math.pi


@given(st.floats(1e-9, 1e-5))
def test_adaptive_meets_tolerance(tol):
    traj = integrate_adaptive(decay, [1.0], IntegratorConfig(t_end=3.0, rtol=tol, atol=tol))
    assert np.max(np.abs(traj.states[:, 0] - np.exp(-traj.times))) < 100 * tol


def test_adaptive_step_shrinks_during_chattering():
    sys_ = IvanovSystem(PointMassModel().accel, ConstraintSet.single(0.0), ImpactLaw(0.9))
    traj = integrate_adaptive(sys_.rhs, [1.0, 0.0], IntegratorConfig(t_end=5.0, rtol=1e-10, atol=1e-10))
    steps = np.diff(traj.times)
    half = len(steps) // 2
    # impacts come ever closer together: later steps are shorter on average
    assert np.median(steps[half:]) < np.median(steps[:half])


def test_adaptive_step_underflow():
    # finite-time blow-up y' = y^2 at t = 1 forces h -> 0
    with pytest.raises(IntegrationError):
        integrate_adaptive(lambda t, y: y ** 2, [1.0], IntegratorConfig(t_end=2.0, rtol=1e-10, atol=1e-10))


def test_stepper_reset_restarts():
    st_ = AdaptiveStepper(decay, 0.0, np.array([1.0]), 1e-10, 1e-10)
    st_.advance()
    st_.reset(5.0, np.array([2.0]))
    assert st_.t == 5.0 and st_.y[0] == 2.0


def test_energy_termination_rules():
    e = lambda y: float(y[0])
    assert not energy_termination(np.array([1e-30]), e, 0.0)
    assert not energy_termination(np.array([1e-30]), e, None)
    assert energy_termination(np.array([0.5]), e, 1.0)


def test_energy_termination_point_mass():
    g = 9.8
    sys_ = IvanovSystem(PointMassModel(g).accel, ConstraintSet.single(0.0), ImpactLaw(0.9))

    def energy(y):
        x, v = sys_.physical(y)
        return 0.5 * v[0] ** 2 + g * x[0]

    cfg = IntegratorConfig(t_end=100.0, rtol=1e-10, atol=1e-10, energy_floor=1e-6 * g)
    traj = integrate_adaptive(sys_.rhs, [1.0, 0.0], cfg, energy=energy)
    assert traj.metadata["termination"] == "energy_floor"
    assert traj.times[-1] < 100.0
    assert energy(traj.states[-1]) < 1e-6 * g


def test_energy_monotone_damped_stop_time():
    def damped(t, y):
        return np.array([y[1], -y[0] - 0.5 * y[1]])

    energy = lambda y: 0.5 * float(y @ y)
    cfg = IntegratorConfig(dt=1e-3, t_end=100.0, energy_floor=1e-4)
    traj = integrate_fixed(damped, [1.0, 0.0], cfg, energy=energy)
    assert traj.metadata["termination"] == "energy_floor"
    e = np.array([energy(y) for y in traj.states])
    assert e[-1] < 1e-4 <= e[-2]


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(t_end=-1.0), dict(rtol=0.0), dict(sample_stride=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        IntegratorConfig(**kw)


def test_trajectory_validation_and_interpolation():
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], [[1.0], [2.0]])
    traj = Trajectory([0.0, 1.0, 2.0], [[0.0, 1.0], [1.0, 1.0], [4.0, 1.0]])
    assert traj.at(1.5, 0) == pytest.approx(2.5)
    np.testing.assert_allclose(traj.at([0.5]), [[0.5, 1.0]])
    with pytest.raises(ValueError):
        traj.at(2.5)


def test_step_count_tolerates_rounding():
    assert step_count(10.0, 1e-4) == 100000
    assert step_count(1.0, 0.3) == 4
