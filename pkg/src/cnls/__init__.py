"""Numerical laboratory for the 1D NLS equation with combined power-series
nonlinearities: coefficient-condition checks, ground states (explicit and by
stabilized fixed-point iteration), conservative time integration, the
pseudo-conformal transform, and global-behavior classification."""

from .grid import (ComplexField, Grid, apply_multiplier, bessel, derivative,
                   free_propagate, l2_norm, linf_norm, make_grid, riesz)
from .nonlinearity import (ConditionReport, SeriesNonlinearity, c_factor,
                           check_condition, eval_N, potential_density)
from .profiles import (InfimumCertificate, XNormParams, double_ground_state,
                       infimum_certificate, polynomial_decay, quadratic_phase,
                       sech_ground_state, x_norm)
from .petviashvili import GroundStateResult, solve_ground_state
from .evolve import SimConfig, integrate, step_irk4, step_split
from .conformal import (ClassifyParams, GlobalVerdict, classify_global,
                        conformal_equivalence_check, pseudo_conformal_map,
                        scattering_profile)
from .diagnostics import EnergyBreakdown, TrajectoryRecord, energy, hs_norm, mass

__all__ = [
    "ComplexField", "Grid", "make_grid", "apply_multiplier", "derivative",
    "bessel", "riesz", "free_propagate", "l2_norm", "linf_norm",
    "SeriesNonlinearity", "ConditionReport", "c_factor", "check_condition",
    "eval_N", "potential_density",
    "XNormParams", "InfimumCertificate", "polynomial_decay",
    "sech_ground_state", "double_ground_state", "quadratic_phase", "x_norm",
    "infimum_certificate",
    "GroundStateResult", "solve_ground_state",
    "SimConfig", "integrate", "step_split", "step_irk4",
    "GlobalVerdict", "ClassifyParams", "classify_global",
    "pseudo_conformal_map", "scattering_profile", "conformal_equivalence_check",
    "EnergyBreakdown", "TrajectoryRecord", "mass", "energy", "hs_norm",
]

__version__ = "0.1.0"
