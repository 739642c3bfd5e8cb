import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdvbalance.dynamics import Params, solitary_wave
from kdvbalance.experiments import fit_loglog_slope
from kdvbalance.flow import (
    ColumnKind,
    column_integral,
    column_slice,
    dynamic_pressure,
    horizontal_velocity,
    vertical_velocity,
)
from kdvbalance.grid import Field, l2_norm, make_grid
from kdvbalance.laws import density, flux
from kdvbalance.profiles import GaussianProfile

from conftest import epsilons, trig_coeffs, trig_field


@pytest.fixture(scope="module")
def small_grid():
    return make_grid(64, 10.0)


def test_horizontal_velocity_zero(small_grid):
    out = horizontal_velocity(Field.constant(small_grid, 0.0), Params(0.1), 0.4)
    assert np.all(out.values == 0.0)


@pytest.mark.parametrize("z", [0.0, 0.3, 1.0, 1.3])
def test_horizontal_velocity_constant(small_grid, z):
    out = horizontal_velocity(Field.constant(small_grid, 0.5), Params(0.1), z)
    np.testing.assert_allclose(out.values, 0.49375, rtol=1e-14)


@settings(max_examples=25, deadline=None)
@given(trig_coeffs, epsilons, st.floats(0.0, 1.3))
def test_bed_impermeability(coeffs, eps, z):
    g = make_grid(64, 2 * np.pi)
    eta = trig_field(g, coeffs)
    assert np.all(vertical_velocity(eta, Params(eps), 0.0).values == 0.0)
    # and the vertical velocity is linear in z
    w = vertical_velocity(eta, Params(eps), z).values
    w1 = vertical_velocity(eta, Params(eps), 1.0).values
    np.testing.assert_allclose(w, z * w1, atol=1e-14)


def test_vertical_velocity_constant(small_grid):
    out = vertical_velocity(Field.constant(small_grid, 0.7), Params(0.2), 0.8)
    assert np.max(np.abs(out.values)) == 0.0


@settings(max_examples=25, deadline=None)
@given(trig_coeffs, epsilons)
def test_pressure_at_unit_height_is_eta(coeffs, eps):
    g = make_grid(64, 2 * np.pi)
    eta = trig_field(g, coeffs)
    np.testing.assert_allclose(dynamic_pressure(eta, Params(eps), 1.0).values, eta.values,
                               atol=1e-13)


def test_pressure_constant_at_bed(small_grid):
    out = dynamic_pressure(Field.constant(small_grid, 0.5), Params(0.1), 0.0)
    np.testing.assert_allclose(out.values, 0.5)


@pytest.mark.parametrize("z", [-0.1, np.nan])
def test_negative_height_rejected(small_grid, z):
    eta = Field.constant(small_grid, 0.0)
    for fn in (horizontal_velocity, vertical_velocity, dynamic_pressure):
        with pytest.raises(ValueError):
            fn(eta, Params(0.1), z)


def test_height_above_limit_rejected(small_grid):
    with pytest.raises(ValueError):
        column_slice(Field.constant(small_grid, 0.0), Params(0.1), 1.31)


def test_slice_flags_exterior_points():
    g = make_grid(1024, 100.0)
    p = Params(0.1)
    eta = solitary_wave(1.0, p, 50.0, 0.0, g)
    sl = column_slice(eta, p, 1.05)
    # above the undisturbed surface, inside the crest only
    assert sl.exterior.any() and not sl.exterior.all()
    np.testing.assert_array_equal(sl.exterior, 1.05 > 1 + 0.1 * eta.values)
    assert not column_slice(eta, p, 0.5).exterior.any()
    with pytest.raises(ValueError):
        sl.exterior[0] = True


def test_column_momentum_zero(small_grid):
    out = column_integral("Momentum", Field.constant(small_grid, 0.0), Params(0.1))
    assert np.max(np.abs(out.values)) == 0.0


@pytest.mark.parametrize("eps", [0.05, 0.2])
def test_column_flow_force_hydrostatic(small_grid, eps):
    out = column_integral(ColumnKind.FLOW_FORCE, Field.constant(small_grid, 0.0), Params(eps))
    np.testing.assert_allclose(out.values, 0.5, rtol=1e-14)


def test_column_energy_undisturbed(small_grid):
    out = column_integral("Energy", Field.constant(small_grid, 0.0), Params(0.1))
    np.testing.assert_allclose(out.values, 0.5, rtol=1e-14)


def test_column_kind_parse():
    assert ColumnKind.parse("FLOW_FORCE") is ColumnKind.FLOW_FORCE
    with pytest.raises(ValueError):
        ColumnKind.parse("Vorticity")


@pytest.mark.parametrize("nz", [8, 31, 40.5])
def test_column_rejects_few_nodes(small_grid, nz):
    with pytest.raises(ValueError):
        column_integral("Energy", Field.constant(small_grid, 0.0), Params(0.1), nz=nz)


@pytest.mark.parametrize("kind", list(ColumnKind))
def test_quadrature_converged(kind):
    g = make_grid(1024, 100.0)
    p = Params(0.2)
    eta = solitary_wave(1.0, p, 50.0, 0.0, g)
    a = column_integral(kind, eta, p, nz=64).values
    b = column_integral(kind, eta, p, nz=128).values
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


PRINTED = {
    ColumnKind.MOMENTUM: lambda eta, p: density("Momentum", eta, p),
    ColumnKind.FLOW_FORCE: lambda eta, p: flux("Momentum", eta, p),
    ColumnKind.ENERGY: lambda eta, p: density("Energy", eta, p),
    ColumnKind.ENERGY_FLUX: lambda eta, p: flux("Energy", eta, p),
    ColumnKind.MASS_FLUX: lambda eta, p: flux("Mass", eta, p),
}


def _mismatch_slope(kind, profile):
    g = make_grid(1024, 100.0)
    pts = []
    for eps in (0.05, 0.1, 0.2):
        p = Params(eps)
        eta = profile.build(g, p)
        diff = column_integral(kind, eta, p) - PRINTED[kind](eta, p)
        pts.append((eps, l2_norm(diff)))
    return fit_loglog_slope(pts)[0]


@pytest.mark.parametrize(
    "kind",
    [ColumnKind.MOMENTUM, ColumnKind.FLOW_FORCE, ColumnKind.ENERGY, ColumnKind.ENERGY_FLUX],
)
@pytest.mark.parametrize("profile", [GaussianProfile(1.0, 5.0), GaussianProfile(0.3, 8.0)])
def test_column_integrals_match_printed_formulas(kind, profile):
    assert _mismatch_slope(kind, profile) >= 2.8


def test_mass_flux_matches_to_first_order():
    # the shape function carries one power of eps less than the physical fluxes
    assert _mismatch_slope(ColumnKind.MASS_FLUX, GaussianProfile(1.0, 5.0)) >= 1.8
