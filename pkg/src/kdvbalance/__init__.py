"""Pseudospectral KdV solver with momentum and energy balance-law diagnostics."""

__version__ = "0.1.0"

from .grid import Field, Grid, derivative, dealias, integral, make_grid, norms, sobolev_norm
from .dynamics import (
    Params,
    SolverConfig,
    Trajectory,
    advance,
    kdv_rhs,
    simulate,
    solitary_wave,
)
from .laws import (
    LawId,
    conserved_integrals,
    density,
    density_time_derivative,
    flux,
    residual,
    residual_closed_form,
    residual_time_difference,
)
from .flow import (
    column_integral,
    dynamic_pressure,
    horizontal_velocity,
    vertical_velocity,
)
from .experiments import epsilon_sweep, fit_loglog_slope, invariant_drift, time_uniformity

__all__ = [
    "Field", "Grid", "derivative", "dealias", "integral", "make_grid", "norms",
    "sobolev_norm", "Params", "SolverConfig", "Trajectory", "advance", "kdv_rhs",
    "simulate", "solitary_wave", "LawId", "conserved_integrals", "density",
    "density_time_derivative", "flux", "residual", "residual_closed_form",
    "residual_time_difference",
    "column_integral", "dynamic_pressure", "horizontal_velocity", "vertical_velocity",
    "epsilon_sweep", "fit_loglog_slope", "invariant_drift", "time_uniformity",
]
