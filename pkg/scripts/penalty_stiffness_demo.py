"""Penalty stiffness versus step size on the single-degree-of-freedom oscillator.

Prints the trajectory MSE of the penalty method against the event-driven
reference for a grid of stiffnesses and steps, next to the transformed
(Ivanov) scheme, which has no stiffness parameter at all.
"""

import numpy as np

from vibroimpact.analysis import mse
from vibroimpact.contact_baselines import PenaltyParams, event_reference_sdof, penalty_sdof_system
from vibroimpact.integrators import IntegrationError, IntegratorConfig, integrate_fixed
from vibroimpact.models import SdofModel
from vibroimpact.nonsmooth_core import ConstraintSet, ImpactLaw, IvanovSystem

MODEL = SdofModel(m=1.0, k_s=1.0, c=0.0, d=0.5)
DTS = (1e-4, 1e-3, 1e-2, 1e-1)
T_END = 10.0


def main():
    ref = event_reference_sdof(MODEL, ImpactLaw(1.0), (1.0, 0.0), T_END, tolerances=(1e-12, 1e-12))
    print("method        " + "".join(f"dt={dt:<10g}" for dt in DTS))

    system = IvanovSystem(MODEL.accel, ConstraintSet.single(MODEL.d), ImpactLaw(1.0))
    y0 = system.initial_state([1.0], [0.0])
    disp = lambda traj, t: system.physical(traj.at(t))[0][:, 0]
    row = [mse(ref, integrate_fixed(system.rhs, y0, IntegratorConfig(dt=dt, t_end=T_END)), disp,
               span=(0.0, T_END), reference_component=0).e for dt in DTS]
    print("ivanov        " + "".join(f"{e:<13.3e}" for e in row))

    for kp in (1e5, 1e6, 1e7, 1e8):
        rhs = penalty_sdof_system(MODEL, PenaltyParams(kp))
        row = []
        for dt in DTS:
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    traj = integrate_fixed(rhs, [1.0, 0.0], IntegratorConfig(dt=dt, t_end=T_END))
                    row.append(mse(ref, traj, 0, span=(0.0, T_END)).e)
            except IntegrationError:
                row.append(float("inf"))
        print(f"penalty {kp:<6.0e}" + "".join(f"{e:<13.3e}" for e in row))


if __name__ == "__main__":
    main()
