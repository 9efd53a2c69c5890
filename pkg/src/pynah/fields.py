"""Complex pressure/velocity fields attached to plane grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError
from .geometry import PlaneGrid

__all__ = ["PhysicalConstants", "ComplexField", "PRESSURE", "VELOCITY"]

PRESSURE = "pressure"
VELOCITY = "velocity"


@dataclass(frozen=True)
class PhysicalConstants:
    """Medium properties: sound speed c [m/s] and density rho [kg/m^3]."""

    c: float = 343.0
    rho: float = 1.225

    def __post_init__(self):
        if not (self.c > 0 and np.isfinite(self.c)):
            raise ConfigurationError(f"sound speed must be positive, got {self.c}")
        if not (self.rho > 0 and np.isfinite(self.rho)):
            raise ConfigurationError(f"density must be positive, got {self.rho}")

    def wavenumber(self, omega: float) -> float:
        return omega / self.c


@dataclass(frozen=True)
class ComplexField:
    """Single-frequency complex field sampled on a :class:`PlaneGrid`.

    ``values`` is a flat complex vector, row-major in the grid's (i, j)
    enumeration. ``kind`` is either ``"pressure"`` (Pa) or ``"velocity"``
    (m/s, normal component).
    """

    values: np.ndarray = field(repr=False)
    grid: PlaneGrid
    omega: float
    kind: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128).ravel()
        object.__setattr__(self, "values", values)
        if self.kind not in (PRESSURE, VELOCITY):
            raise ContractError(f"unknown field kind {self.kind!r}")
        if values.size != self.grid.n_points:
            raise ContractError(
                f"field has {values.size} values but grid has {self.grid.n_points} points"
            )
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise ContractError(f"omega must be positive and finite, got {self.omega}")

    def as_matrix(self) -> np.ndarray:
        """Values reshaped to (nx, ny)."""
        return self.values.reshape(self.grid.nx, self.grid.ny)

    def with_values(self, values: np.ndarray, kind: str | None = None) -> "ComplexField":
        return ComplexField(values, self.grid, self.omega, self.kind if kind is None else kind)
