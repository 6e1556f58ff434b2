import math

import numpy as np
import pytest

from vibroimpact.analysis import mse
from vibroimpact.contact_baselines import (
    PenaltyParams, ZenoError, event_reference, event_reference_sdof, penalty_sdof_rhs,
    penalty_sdof_system, penalty_string_rhs, penalty_string_system,
)
from vibroimpact.integrators import IntegratorConfig, integrate_fixed
from vibroimpact.models import GalerkinStringModel, ObstacleProfile, SdofModel, sample_obstacle
from vibroimpact.nonsmooth_core import ConstraintSet, ImpactLaw, IvanovSystem, PhysicalState

SDOF = SdofModel(1.0, 1.0, 0.0, 0.5)


def test_penalty_params_validation():
    with pytest.raises(ValueError):
        PenaltyParams(0.0)


def test_penalty_sdof_free_branch():
    pen = PenaltyParams(1e6)
    assert penalty_sdof_rhs(0.7, 0.2, 0.0, SDOF, pen) == pytest.approx(-0.7)
    # continuous at contact
    assert penalty_sdof_rhs(0.5, 0.0, 0.0, SDOF, pen) == pytest.approx(-0.5)


def test_penalty_sdof_contact_term():
    pen = PenaltyParams(1e6)
    p = 0.5 - 1e-6
    added = penalty_sdof_rhs(p, 0.0, 0.0, SDOF, pen) - (-p)
    assert added == pytest.approx(1.0, rel=1e-9)


def test_penalty_string_rhs():
    model = GalerkinStringModel(9)
    cs = ConstraintSet([3, 4, 5], [0.01, 0.01, 0.01], 9)
    pen = PenaltyParams(1e8)
    p = 0.02 * np.sin(np.pi * model.grid)
    pdot = np.zeros(9)
    np.testing.assert_array_equal(penalty_string_rhs(p, pdot, 0.0, model, cs, pen), model.physical_rhs(p, pdot))
    p2 = p.copy()
    p2[4] = 0.01 - 2e-7
    diff = penalty_string_rhs(p2, pdot, 0.0, model, cs, pen) - model.physical_rhs(p2, pdot)
    expected = np.zeros(9)
    expected[4] = 1e8 * 2e-7
    np.testing.assert_allclose(diff, expected, atol=1e-9)


def test_penalty_systems_are_first_order():
    y = np.array([0.4, 0.1])
    rhs = penalty_sdof_system(SDOF, PenaltyParams(1e5))
    np.testing.assert_allclose(rhs(0.0, y), [0.1, penalty_sdof_rhs(0.4, 0.1, 0.0, SDOF, PenaltyParams(1e5))])
    model = GalerkinStringModel(5)
    cs = sample_obstacle(ObstacleProfile.flat(), model.grid)
    y = np.concatenate([np.full(5, 0.01), np.ones(5)])
    out = penalty_string_system(model, cs, PenaltyParams(1e8))(0.0, y)
    np.testing.assert_array_equal(out[:5], np.ones(5))


# -- event-driven reference ------------------------------------------------------------------


def test_event_reference_first_impact():
    traj = event_reference_sdof(SDOF, ImpactLaw(1.0), PhysicalState([1.0], [0.0], [], []), 3.0)
    t, vm, vp = traj.metadata["impacts"][0]
    assert abs(t - math.pi / 3) < 1e-10
    assert vm == pytest.approx(-math.sin(math.pi / 3), abs=1e-10)
    assert vp == pytest.approx(-vm, rel=1e-15)


def test_event_reference_impact_times_periodic():
    # elastic: each flight is the arc of the unit circle orbit with cos > 1/2, of length 2pi/3
    traj = event_reference_sdof(SDOF, ImpactLaw(1.0), (1.0, 0.0), 10.0)
    times = np.array([i[0] for i in traj.metadata["impacts"]])
    period = 2 * math.pi / 3
    np.testing.assert_allclose(times, math.pi / 3 + period * np.arange(len(times)), atol=1e-9)
    assert len(times) == 5
    assert np.min(traj.states[:, 0] - 0.5) >= -1e-12


def test_event_reference_restitution():
    traj = event_reference_sdof(SDOF, ImpactLaw(0.8), (1.0, 0.0), 4.0, tolerances=(1e-12, 1e-12))
    for _, vm, vp in traj.metadata["impacts"]:
        assert vp == pytest.approx(-0.8 * vm, rel=1e-15)


def test_event_reference_without_contact():
    low = SdofModel(1.0, 1.0, 0.0, -2.0)
    traj = event_reference_sdof(low, ImpactLaw(1.0), (1.0, 0.0), 10.0, tolerances=IntegratorConfig())
    assert traj.metadata["impacts"] == []
    np.testing.assert_allclose(traj.states[:, 0], np.cos(traj.times), atol=1e-10)


def test_event_reference_rejects_violation():
    with pytest.raises(ValueError):
        event_reference_sdof(SDOF, ImpactLaw(1.0), (0.4, 0.0), 1.0)


def test_event_reference_point_mass_rest_and_zeno_guard():
    accel = lambda p, v, t: -9.8
    traj = event_reference(accel, 0.0, ImpactLaw(0.5), 1.0, 0.0, 5.0)
    # settles on the floor and stays there
    assert traj.times[-1] == 5.0
    assert traj.states[-1, 0] == 0.0 and traj.states[-1, 1] == 0.0
    with pytest.raises(ZenoError):
        event_reference(accel, 0.0, ImpactLaw(0.5), 1.0, 0.0, 5.0, max_impacts=5)


def test_ivanov_matches_reference_at_fine_step():
    ref = event_reference_sdof(SDOF, ImpactLaw(1.0), (1.0, 0.0), 10.0)
    sys_ = IvanovSystem(SDOF.accel, ConstraintSet.single(0.5), ImpactLaw(1.0))
    traj = integrate_fixed(sys_.rhs, sys_.initial_state([1.0], [0.0]), IntegratorConfig(dt=1e-3, t_end=10.0))

    def disp(tr, t):
        return sys_.physical(tr.at(t))[0][:, 0]

    assert mse(ref, traj, disp, reference_component=0).e < 1e-6


# -- stiffness ---------------------------------------------------------------------------------


def test_penalty_blows_up_where_ivanov_stays_bounded():
    cfg = IntegratorConfig(dt=1e-1, t_end=10.0)
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            pen = integrate_fixed(penalty_sdof_system(SDOF, PenaltyParams(1e7)), [1.0, 0.0], cfg)
            pen_energy = np.max(SDOF.energy(pen.states[:, 0], pen.states[:, 1]))
        except Exception:
            pen_energy = math.inf
    assert pen_energy > 1e6 * SDOF.energy(1.0, 0.0)
    sys_ = IvanovSystem(SDOF.accel, ConstraintSet.single(0.5), ImpactLaw(1.0))
    iv = integrate_fixed(sys_.rhs, sys_.initial_state([1.0], [0.0]), cfg)
    x, v = sys_.physical(iv.states)
    # bounded, though RK4 across the crossings perturbs the energy by a few percent at this dt
    assert np.max(SDOF.energy(x[:, 0], v[:, 0])) < 2.0 * SDOF.energy(1.0, 0.0)


def test_penalty_consistency_in_stiffness():
    """At dt = 1e-4 the penalty solution approaches the rigid reference as k_p grows,
    until k_p = 1e8 where omega_p * dt = 1 and the explicit step itself dominates."""
    ref = event_reference_sdof(SDOF, ImpactLaw(1.0), (1.0, 0.0), 10.0)
    cfg = IntegratorConfig(dt=1e-4, t_end=10.0, sample_stride=10)
    errors = {}
    for kp in (1e5, 1e6, 1e7, 1e8):
        traj = integrate_fixed(penalty_sdof_system(SDOF, PenaltyParams(kp)), [1.0, 0.0], cfg)
        errors[kp] = mse(ref, traj, 0).e
    assert errors[1e5] > errors[1e6] > errors[1e7]
    assert errors[1e8] > errors[1e7]
