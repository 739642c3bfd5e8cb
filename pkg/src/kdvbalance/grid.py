"""Periodic grids, real fields and exact Fourier calculus on them.

All spectral work uses real-to-complex transforms (``numpy.fft.rfft``).
Norms and integrals are continuum-normalised: a norm computed on a coarse
grid and on a fine grid of the same band-limited function agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridError, NonFiniteError

MAX_DERIVATIVE_ORDER = 6


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``x_j = j * length / n`` on ``[0, length)``."""

    n: int
    length: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise GridError(f"grid size must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))
        if self.n < 8:
            raise GridError(f"grid size must be at least 8, got {self.n}")
        if self.n % 2:
            raise GridError(f"grid size must be even, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise GridError(f"domain length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        pts = np.arange(self.n) * self.spacing
        pts.flags.writeable = False
        return pts

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full FFT-ordered wavenumbers 2*pi*m/L (Nyquist stored as +n/2)."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        m[self.n // 2] = self.n // 2
        k = 2.0 * np.pi * m / self.length
        k.flags.writeable = False
        return k

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Non-negative wavenumbers matching ``numpy.fft.rfft`` output."""
        k = 2.0 * np.pi * np.arange(self.n // 2 + 1) / self.length
        k.flags.writeable = False
        return k

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True for rfft modes kept by the two-thirds rule (|m| <= n/3)."""
        mask = np.arange(self.n // 2 + 1) <= self.n // 3
        mask.flags.writeable = False
        return mask

    def multiplier(self, order: int) -> np.ndarray:
        """Spectral multiplier ``(i k)**order`` for the rfft modes.

        The Nyquist mode has no antisymmetric partner, so odd-order
        multipliers are zeroed there to keep the derivative real.
        """
        mult = (1j * self.rwavenumbers) ** order
        if order % 2:
            mult[-1] = 0.0
        return mult

    def same_as(self, other: "Grid") -> bool:
        return self.n == other.n and self.length == other.length


def make_grid(n: int, length: float) -> Grid:
    """Build a periodic grid; rejects odd ``n``, ``n < 8`` and ``length <= 0``."""
    return Grid(n, length)


def _check_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("field contains non-finite values")


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function of x on a :class:`Grid`.

    Instances are immutable; arithmetic returns new fields and requires the
    operands to live on the same grid (compared by ``(n, length)``).
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.n,):
            raise GridError(
                f"expected {self.grid.n} samples, got array of shape {vals.shape}"
            )
        _check_finite(vals)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        return cls(grid, func(grid.x))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.n, float(value)))

    def _other_values(self, other):
        if isinstance(other, Field):
            if not self.grid.same_as(other.grid):
                raise GridError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other_values(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other_values(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other_values(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other_values(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / self._other_values(other))

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __len__(self):
        return self.grid.n


# --- array-level kernels (used internally by the solver and the laws) ---


def spectral_derivative(values: np.ndarray, grid: Grid, order: int) -> np.ndarray:
    return np.fft.irfft(grid.multiplier(order) * np.fft.rfft(values), n=grid.n)


def dealias_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(values) * grid.dealias_mask, n=grid.n)


def dealiased_product(grid: Grid, *factors: np.ndarray) -> np.ndarray:
    """Pointwise product of the truncated factors, truncated again."""
    out = dealias_values(factors[0], grid)
    for f in factors[1:]:
        out = out * dealias_values(f, grid)
    return dealias_values(out, grid)


# --- public Field operations ---


def derivative(f: Field, order: int = 1) -> Field:
    """Spectral x-derivative of ``f`` of the given order (1 to 6)."""
    if isinstance(order, bool) or int(order) != order or not 1 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"derivative order must be in [1, {MAX_DERIVATIVE_ORDER}], got {order!r}"
        )
    return Field(f.grid, spectral_derivative(f.values, f.grid, int(order)))


def integral(f: Field) -> float:
    """Integral over one period, ``length * mean(values)``."""
    return float(f.grid.length * np.mean(f.values))


def norms(f: Field) -> tuple[float, float]:
    """Continuum-normalised L2 norm and max norm of ``f``."""
    l2 = float(np.sqrt(f.grid.length * np.mean(f.values**2)))
    linf = float(np.max(np.abs(f.values)))
    return l2, linf


def l2_norm(f: Field) -> float:
    return norms(f)[0]


def sobolev_norm(f: Field, k: int) -> float:
    """H^k norm: sqrt of the summed squared L2 norms of derivatives 0..k."""
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"Sobolev index must be in [0, {MAX_DERIVATIVE_ORDER}], got {k!r}")
    total = l2_norm(f) ** 2
    for j in range(1, int(k) + 1):
        total += l2_norm(derivative(f, j)) ** 2
    return float(np.sqrt(total))


def dealias(f: Field) -> Field:
    """Zero every mode with |m| > n/3."""
    return Field(f.grid, dealias_values(f.values, f.grid))


def interpolate(f: Field, x, order: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``f`` (or a derivative) at ``x``."""
    grid = f.grid
    coeffs = np.fft.rfft(f.values) / grid.n
    weights = np.full(coeffs.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0  # Nyquist appears once
    mult = grid.multiplier(order) if order else 1.0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.exp(1j * np.outer(x, grid.rwavenumbers))
    return (phase @ (weights * mult * coeffs)).real


def peak(f: Field) -> tuple[float, float]:
    """Location and value of the maximum of the band-limited interpolant.

    Starts from the largest sample and refines with Newton steps on the
    first derivative.
    """
    j = int(np.argmax(f.values))
    x = f.grid.x[j]
    h = f.grid.spacing
    for _ in range(20):
        d1 = interpolate(f, x, 1)[0]
        d2 = interpolate(f, x, 2)[0]
        if d2 >= 0:
            break
        step = d1 / d2
        step = max(-h, min(h, step))
        x -= step
        if abs(step) < 1e-14 * max(1.0, abs(x)):
            break
    return float(x % f.grid.length), float(interpolate(f, x)[0])
