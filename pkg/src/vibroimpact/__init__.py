"""Vibro-impact simulation with a nonsmooth (Ivanov) coordinate transformation."""

from .nonsmooth_core import (ConstraintSet, ConstraintViolation, ImpactLaw, IvanovSystem,
                             PhysicalState, TransformedState, build_T, build_W, sign_convention,
                             to_physical, to_transformed, transformed_rhs)
from .models import (GalerkinStringModel, ObstacleProfile, PointMassModel, SdofModel, build_phi,
                     mode_shape, nondimensionalize, sample_obstacle)
from .integrators import (IntegrationError, IntegratorConfig, Trajectory, integrate_adaptive,
                          integrate_fixed, rk4_step)

__version__ = "0.1.0"
