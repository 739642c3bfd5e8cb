"""Initial-data specifications shared by the experiments and the CLI."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dynamics import Params, solitary_wave
from .grid import Field, Grid


@dataclass(frozen=True)
class SolitaryProfile:
    """Exact traveling wave of amplitude ``amplitude`` centred at ``x0``."""

    amplitude: float = 1.0
    x0: float | None = None
    kind = "solitary"

    def build(self, grid: Grid, params: Params) -> Field:
        x0 = grid.length / 2 if self.x0 is None else self.x0
        return solitary_wave(self.amplitude, params, x0, 0.0, grid)


@dataclass(frozen=True)
class GaussianProfile:
    """amplitude * exp(-((x - x0) / width)**2)."""

    amplitude: float = 0.3
    width: float = 5.0
    x0: float | None = None
    kind = "gaussian"

    def build(self, grid: Grid, params: Params) -> Field:
        x0 = grid.length / 2 if self.x0 is None else self.x0
        return Field(grid, self.amplitude * np.exp(-(((grid.x - x0) / self.width) ** 2)))


@dataclass(frozen=True)
class Sech2Profile:
    """amplitude * sech^2(k (x - x0)); not a traveling wave unless k matches."""

    amplitude: float = 0.5
    k: float = 0.8
    x0: float | None = None
    kind = "sech2"

    def build(self, grid: Grid, params: Params) -> Field:
        x0 = grid.length / 2 if self.x0 is None else self.x0
        y = np.abs(self.k * (grid.x - x0))
        e = np.exp(-2 * y)
        return Field(grid, self.amplitude * 4 * e / (1 + e) ** 2)


@dataclass(frozen=True)
class ConstantProfile:
    value: float = 0.0
    kind = "constant"

    def build(self, grid: Grid, params: Params) -> Field:
        return Field.constant(grid, self.value)


@dataclass(frozen=True)
class FileProfile:
    """Samples read from a one- or two-column CSV (``eta`` or ``x,eta``).

    The file must hold exactly ``grid.n`` rows after an optional header.
    """

    path: str
    kind = "file"

    def build(self, grid: Grid, params: Params) -> Field:
        values = []
        with Path(self.path).open(newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    values.append(float(row[-1]))
                except ValueError:
                    if values:
                        raise
        if len(values) != grid.n:
            raise ValueError(
                f"{self.path}: expected {grid.n} samples, found {len(values)}"
            )
        return Field(grid, np.array(values))


PROFILE_KINDS = {
    cls.kind: cls
    for cls in (SolitaryProfile, GaussianProfile, Sech2Profile, ConstantProfile, FileProfile)
}


def profile_to_dict(profile) -> dict:
    return {"kind": profile.kind, **asdict(profile)}
