"""Density/flux pairs for KdV balance laws and their residuals.

Each law is stored as two term tables.  A term is ``coeff * eps**power *
monomial(eta)``; keeping the coefficients as data lets the residual be
evaluated generically and lets tests corrupt single coefficients.

Residuals are evaluated in *analysis mode*: eta_t is replaced by the KdV
right-hand side and differentiated spectrally, no time stepping involved.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import Params, kdv_rhs
from .grid import Field, Grid, dealiased_product, integral, spectral_derivative


class LawId(str, enum.Enum):
    MASS = "Mass"
    QUADRATIC = "QuadraticInvariant"
    CUBIC = "CubicInvariant"
    MOMENTUM = "Momentum"
    ENERGY = "Energy"
    ENERGY_STAR = "EnergyStar"

    @property
    def exact(self) -> bool:
        return self in EXACT_LAWS

    @classmethod
    def parse(cls, name) -> "LawId":
        if isinstance(name, cls):
            return name
        for law in cls:
            if name in (law.value, law.name):
                return law
        raise ValueError(f"unknown law {name!r}; expected one of {[l.value for l in cls]}")


EXACT_LAWS = frozenset({LawId.MASS, LawId.QUADRATIC, LawId.CUBIC})
APPROXIMATE_LAWS = (LawId.MOMENTUM, LawId.ENERGY, LawId.ENERGY_STAR)


@dataclass(frozen=True)
class Term:
    coeff: float
    eps_power: int
    monomial: str


@dataclass(frozen=True)
class LawForm:
    law: LawId
    density: tuple[Term, ...]
    flux: tuple[Term, ...]
    scale_power: int

    def with_flux_coefficient(self, index: int, factor: float) -> "LawForm":
        """Copy of the law with one flux coefficient multiplied by ``factor``."""
        terms = list(self.flux)
        terms[index] = replace(terms[index], coeff=terms[index].coeff * factor)
        return replace(self, flux=tuple(terms))

    def with_density_coefficient(self, index: int, factor: float) -> "LawForm":
        terms = list(self.density)
        terms[index] = replace(terms[index], coeff=terms[index].coeff * factor)
        return replace(self, density=tuple(terms))


def _t(c, p, m):
    return Term(float(c), p, m)


LAW_FORMS: dict[LawId, LawForm] = {
    LawId.MASS: LawForm(
        LawId.MASS,
        density=(_t(1, 0, "eta"),),
        flux=(_t(1, 0, "eta"), _t(3 / 4, 1, "eta^2"), _t(1 / 6, 1, "eta_xx")),
        scale_power=0,
    ),
    LawId.QUADRATIC: LawForm(
        LawId.QUADRATIC,
        density=(_t(1, 0, "eta^2"),),
        flux=(
            _t(1, 0, "eta^2"),
            _t(1, 1, "eta^3"),
            _t(1 / 3, 1, "eta*eta_xx"),
            _t(-1 / 6, 1, "eta_x^2"),
        ),
        scale_power=0,
    ),
    LawId.CUBIC: LawForm(
        LawId.CUBIC,
        density=(_t(1, 0, "eta^3"), _t(-1 / 3, 0, "eta_x^2")),
        flux=(
            _t(1, 0, "eta^3"),
            _t(9 / 8, 1, "eta^4"),
            _t(2 / 3, 0, "eta_x*eta_t"),
            _t(1 / 3, 0, "eta_x^2"),
            _t(1 / 18, 1, "eta_xx^2"),
            _t(1 / 2, 1, "eta^2*eta_xx"),
        ),
        scale_power=0,
    ),
    LawId.MOMENTUM: LawForm(
        LawId.MOMENTUM,
        density=(_t(1, 1, "eta"), _t(3 / 4, 2, "eta^2"), _t(1 / 6, 2, "eta_xx")),
        flux=(_t(1 / 2, 0, "1"), _t(1, 1, "eta"), _t(3 / 2, 2, "eta^2"), _t(1 / 3, 2, "eta_xx")),
        scale_power=1,
    ),
    LawId.ENERGY: LawForm(
        LawId.ENERGY,
        density=(_t(1 / 2, 0, "1"), _t(1, 1, "eta"), _t(1, 2, "eta^2")),
        flux=(_t(1, 1, "eta"), _t(7 / 4, 2, "eta^2"), _t(1 / 6, 2, "eta_xx")),
        scale_power=1,
    ),
    LawId.ENERGY_STAR: LawForm(
        LawId.ENERGY_STAR,
        density=(
            _t(1, 2, "eta^2"),
            _t(1 / 4, 3, "eta^3"),
            _t(1 / 6, 3, "eta*eta_xx"),
            _t(1 / 6, 3, "eta_x^2"),
        ),
        flux=(_t(1, 2, "eta^2"), _t(5 / 4, 3, "eta^3"), _t(1 / 2, 3, "eta*eta_xx")),
        scale_power=2,
    ),
}


def law_form(law) -> LawForm:
    if isinstance(law, LawForm):
        return law
    return LAW_FORMS[LawId.parse(law)]


class _Derivs:
    """Lazily computed x-derivatives of eta and of eta_t on one grid."""

    def __init__(self, eta: Field, params: Params):
        self.grid: Grid = eta.grid
        self.params = params
        self._eta = eta
        self._d: dict[int, np.ndarray] = {0: eta.values}
        self._dt: dict[int, np.ndarray] = {}

    def d(self, k: int) -> np.ndarray:
        if k not in self._d:
            self._d[k] = spectral_derivative(self._d[0], self.grid, k)
        return self._d[k]

    def dt(self, k: int) -> np.ndarray:
        if not self._dt:
            self._dt[0] = kdv_rhs(self._eta, self.params).values
        if k not in self._dt:
            self._dt[k] = spectral_derivative(self._dt[0], self.grid, k)
        return self._dt[k]

    def prod(self, *factors):
        if len(factors) == 1:
            return factors[0]
        return dealiased_product(self.grid, *factors)


# monomial -> (value, time derivative with eta_t eliminated)
def _value(name: str, D: _Derivs) -> np.ndarray:
    e, ex, exx = D.d(0), None, None
    if name == "1":
        return np.ones(D.grid.n)
    if name == "eta":
        return e
    if name.startswith("eta^") and name[4:].isdigit():
        return D.prod(*([e] * int(name[4:])))
    ex = D.d(1) if "eta_x" in name else None
    exx = D.d(2) if "eta_xx" in name else None
    table = {
        "eta_xx": lambda: exx,
        "eta_x^2": lambda: D.prod(ex, ex),
        "eta*eta_xx": lambda: D.prod(e, exx),
        "eta_xx^2": lambda: D.prod(exx, exx),
        "eta^2*eta_xx": lambda: D.prod(e, e, exx),
        "eta_x*eta_t": lambda: D.prod(ex, D.dt(0)),
    }
    return table[name]()


def _time_derivative(name: str, D: _Derivs) -> np.ndarray:
    e, et = D.d(0), D.dt(0)
    if name == "1":
        return np.zeros(D.grid.n)
    if name == "eta":
        return et
    if name == "eta^2":
        return 2 * D.prod(e, et)
    if name == "eta^3":
        return 3 * D.prod(e, e, et)
    if name == "eta_xx":
        return D.dt(2)
    if name == "eta_x^2":
        return 2 * D.prod(D.d(1), D.dt(1))
    if name == "eta*eta_xx":
        return D.prod(et, D.d(2)) + D.prod(e, D.dt(2))
    raise KeyError(f"no time derivative rule for density monomial {name!r}")


def _sum_terms(terms, eps, evaluate, D: _Derivs) -> np.ndarray:
    out = np.zeros(D.grid.n)
    for term in terms:
        out = out + term.coeff * eps**term.eps_power * evaluate(term.monomial, D)
    return out


def density(law, eta: Field, params: Params) -> Field:
    """Physical (unscaled) density of ``law`` evaluated on ``eta``."""
    form = law_form(law)
    D = _Derivs(eta, params)
    return Field(eta.grid, _sum_terms(form.density, params.epsilon, _value, D))


def flux(law, eta: Field, params: Params) -> Field:
    """Physical (unscaled) flux; eta_t inside the cubic flux comes from the PDE."""
    form = law_form(law)
    D = _Derivs(eta, params)
    return Field(eta.grid, _sum_terms(form.flux, params.epsilon, _value, D))


def density_time_derivative(law, eta: Field, params: Params) -> Field:
    """d/dt of the density with eta_t eliminated by the chain rule and the PDE."""
    form = law_form(law)
    D = _Derivs(eta, params)
    return Field(eta.grid, _sum_terms(form.density, params.epsilon, _time_derivative, D))


def residual(law, eta: Field, params: Params) -> Field:
    """Scaled residual (D_t + F_x) / eps**scale_power."""
    form = law_form(law)
    eps = params.epsilon
    if form.scale_power > 0 and eps == 0:
        raise ZeroDivisionError(f"{form.law.value}: residual scaling undefined at eps = 0")
    D = _Derivs(eta, params)
    dens_t = _sum_terms(form.density, eps, _time_derivative, D)
    flx = _sum_terms(form.flux, eps, _value, D)
    total = dens_t + spectral_derivative(flx, eta.grid, 1)
    return Field(eta.grid, total / eps**form.scale_power)


def residual_time_difference(law, before: Field, center: Field, after: Field, dt: float,
                             params: Params) -> Field:
    """Diagnostic residual with D_t taken as a centred difference of snapshots.

    ``before``/``after`` are the states at t - dt and t + dt; the result agrees
    with ``residual(law, center, params)`` up to O(dt**2).
    """
    form = law_form(law)
    eps = params.epsilon
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if form.scale_power > 0 and eps == 0:
        raise ZeroDivisionError(f"{form.law.value}: residual scaling undefined at eps = 0")
    d_plus = density(form, after, params).values
    d_minus = density(form, before, params).values
    flx = flux(form, center, params).values
    total = (d_plus - d_minus) / (2 * dt) + spectral_derivative(flx, center.grid, 1)
    return Field(center.grid, total / eps**form.scale_power)


def residual_closed_form(law, eta: Field, params: Params) -> Field:
    """Scaled residual written out by hand, independent of the term tables.

    These are the explicit expressions left over once the KdV equation has
    been used to cancel the leading orders.
    """
    law = LawId.parse(law)
    grid, eps = eta.grid, params.epsilon
    if law in EXACT_LAWS:
        return Field(grid, np.zeros(grid.n))

    def dx(v, k=1):
        return spectral_derivative(v, grid, k)

    def p(*fs):
        return dealiased_product(grid, *fs)

    e = eta.values
    e1, e2, e3 = dx(e, 1), dx(e, 2), dx(e, 3)
    if law is LawId.MOMENTUM:
        # (3/2) eps eta (-(3/2) eps eta eta_x - (eps/6) eta_xxx)
        #   + (eps/6) d_x^2 (-(3/2) eps eta eta_x - (eps/6) eta_xxx)
        inner = -1.5 * eps * p(e, e1) - eps / 6 * e3
        out = 1.5 * eps * p(e, inner) + eps / 6 * dx(inner, 2)
    elif law is LawId.ENERGY:
        # (-3 eps^3 eta^2 eta_x - (eps^3/3) eta eta_xxx) / eps
        out = -3 * eps**2 * p(e, e, e1) - eps**2 / 3 * p(e, e3)
    else:
        e4, e5 = dx(e, 4), dx(e, 5)
        out = eps**2 * (
            -9 / 8 * p(e, e, e, e1)
            - 3 / 8 * p(e, e, e3)
            - 3 / 2 * p(e, e1, e2)
            - 1 / 36 * p(e, e5)
            - 1 / 2 * p(e1, e1, e1)
            - 1 / 18 * p(e1, e4)
            - 1 / 36 * p(e2, e3)
        )
    return Field(grid, out)


def conserved_integrals(eta: Field) -> tuple[float, float, float]:
    """The three classical invariants: int eta, int eta^2, int (eta_x^2/3 - eta^3)."""
    grid = eta.grid
    e = eta.values
    ex = spectral_derivative(e, grid, 1)
    m1 = integral(eta)
    m2 = integral(Field(grid, e * e))
    m3 = integral(Field(grid, ex * ex / 3.0 - e**3))
    return m1, m2, m3
