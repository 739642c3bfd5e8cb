"""Interior velocity and pressure reconstructed from the free surface.

The shape functions below are O(1); the physical quantities entering the
column integrals are

    u = eps * phi_x,   w = eps * phi_z,   p = (1 - z) + eps * P'

with kinetic energy (u**2 + w**2) / 2 and potential energy z.  With these
conventions the vertical integrals over [0, 1 + eps*eta] reproduce the
momentum/energy densities and fluxes up to O(eps**3).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import Params
from .grid import Field, spectral_derivative

Z_MAX = 1.3
MIN_NODES = 32


def _check_height(z: float, upper: float | None = None) -> float:
    z = float(z)
    if not np.isfinite(z) or z < 0:
        raise ValueError(f"height z must be non-negative, got {z}")
    if upper is not None and z > upper:
        raise ValueError(f"height z must not exceed {upper}, got {z}")
    return z


def _phi_x(e, exx, eps, z):
    return e - 0.25 * eps * e**2 + eps * (1.0 / 3.0 - 0.5 * z**2) * exx


def _phi_z(ex, eps, z):
    return -eps * z * ex


def _p_dyn(e, exx, eps, z):
    return e - 0.5 * eps * (z**2 - 1.0) * exx


def horizontal_velocity(eta: Field, params: Params, z: float) -> Field:
    """phi_x = eta - (eps/4) eta^2 + eps (1/3 - z^2/2) eta_xx."""
    z = _check_height(z, Z_MAX)
    exx = spectral_derivative(eta.values, eta.grid, 2)
    return Field(eta.grid, _phi_x(eta.values, exx, params.epsilon, z))


def vertical_velocity(eta: Field, params: Params, z: float) -> Field:
    """phi_z = -eps z eta_x; vanishes on the bed."""
    z = _check_height(z)
    ex = spectral_derivative(eta.values, eta.grid, 1)
    return Field(eta.grid, _phi_z(ex, params.epsilon, z))


def dynamic_pressure(eta: Field, params: Params, z: float) -> Field:
    """P' = eta - (eps/2)(z^2 - 1) eta_xx."""
    z = _check_height(z)
    exx = spectral_derivative(eta.values, eta.grid, 2)
    return Field(eta.grid, _p_dyn(eta.values, exx, params.epsilon, z))


@dataclass(frozen=True)
class ColumnSlice:
    """Flow quantities on the horizontal line at height ``z``.

    ``exterior`` marks the points where z lies above the local free surface
    1 + eps*eta(x); the formulas are still evaluated there.
    """

    z: float
    phi_x: Field
    phi_z: Field
    p_dyn: Field
    exterior: np.ndarray


def column_slice(eta: Field, params: Params, z: float) -> ColumnSlice:
    z = _check_height(z, Z_MAX)
    surface = 1.0 + params.epsilon * eta.values
    exterior = z > surface
    exterior.flags.writeable = False
    return ColumnSlice(
        z,
        horizontal_velocity(eta, params, z),
        vertical_velocity(eta, params, z),
        dynamic_pressure(eta, params, z),
        exterior,
    )


class ColumnKind(str, enum.Enum):
    MASS_FLUX = "MassFlux"
    MOMENTUM = "Momentum"
    FLOW_FORCE = "FlowForce"
    ENERGY = "Energy"
    ENERGY_FLUX = "EnergyFlux"

    @classmethod
    def parse(cls, name) -> "ColumnKind":
        if isinstance(name, cls):
            return name
        for kind in cls:
            if name in (kind.value, kind.name):
                return kind
        raise ValueError(f"unknown column integral {name!r}")


def column_integral(kind, eta: Field, params: Params, nz: int = 64) -> Field:
    """Gauss-Legendre integral over each water column [0, 1 + eps*eta(x)].

    MassFlux integrates the shape function phi_x itself; the other kinds
    integrate the physical quantities described in the module docstring.
    """
    kind = ColumnKind.parse(kind)
    if int(nz) != nz or nz < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} quadrature nodes, got {nz}")
    eps = params.epsilon
    grid = eta.grid
    e = eta.values
    ex = spectral_derivative(e, grid, 1)
    exx = spectral_derivative(e, grid, 2)

    nodes, weights = np.polynomial.legendre.leggauss(int(nz))
    depth = 1.0 + eps * e                         # (n,)
    z = 0.5 * (nodes[:, None] + 1.0) * depth      # (nz, n)
    w = 0.5 * weights[:, None] * depth

    phx = _phi_x(e, exx, eps, z)
    if kind is ColumnKind.MASS_FLUX:
        integrand = phx
    else:
        u = eps * phx
        if kind is ColumnKind.MOMENTUM:
            integrand = u
        else:
            p = (1.0 - z) + eps * _p_dyn(e, exx, eps, z)
            if kind is ColumnKind.FLOW_FORCE:
                integrand = u**2 + p
            else:
                wv = eps * _phi_z(ex, eps, z)
                energy = 0.5 * (u**2 + wv**2) + z
                integrand = energy if kind is ColumnKind.ENERGY else (energy + p) * u
    return Field(grid, np.sum(w * integrand, axis=0))
