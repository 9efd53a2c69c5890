"""Plane grids and pairwise distance tables.

All sampling surfaces in this package are uniform rectangular grids on
z-normal planes. A grid point (i, j) sits at::

    (origin_x + i * dx, origin_y + j * dy, z)

and fields attached to a grid enumerate points row-major in (i, j), i.e.
flat index n = i * ny + j. Every module relies on this single ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = ["PlaneGrid", "DistanceTable", "build_plane_grid", "pairwise_distances"]


@dataclass(frozen=True)
class PlaneGrid:
    """Uniform rectangular sampling of a z-normal plane.

    Attributes
    ----------
    nx, ny : int
        Point counts along x and y.
    dx, dy : float
        Sample spacings in meters.
    z : float
        Plane offset along z in meters.
    origin_x, origin_y : float
        Position of sample (0, 0) in meters.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    z: float
    origin_x: float
    origin_y: float

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError(f"grid counts must be >= 1, got {self.nx}x{self.ny}")
        if not (self.dx > 0.0 and np.isfinite(self.dx)):
            raise ConfigurationError(f"dx must be positive and finite, got {self.dx}")
        if not (self.dy > 0.0 and np.isfinite(self.dy)):
            raise ConfigurationError(f"dy must be positive and finite, got {self.dy}")
        if not np.isfinite([self.z, self.origin_x, self.origin_y]).all():
            raise ConfigurationError("grid offsets must be finite")

    @property
    def n_points(self) -> int:
        return self.nx * self.ny

    @property
    def area_element(self) -> float:
        """Quadrature cell area dx * dy in m^2."""
        return self.dx * self.dy

    @property
    def xs(self) -> np.ndarray:
        return self.origin_x + self.dx * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.origin_y + self.dy * np.arange(self.ny)

    def points(self) -> np.ndarray:
        """All sample positions as an (n_points, 3) array, row-major in (i, j)."""
        x, y = np.meshgrid(self.xs, self.ys, indexing="ij")
        z = np.full(x.size, self.z)
        return np.column_stack([x.ravel(), y.ravel(), z])

    def shifted(self, offset_x: float = 0.0, offset_y: float = 0.0, z: float | None = None) -> "PlaneGrid":
        """Copy of this grid translated in-plane and/or moved to another z."""
        return PlaneGrid(
            self.nx,
            self.ny,
            self.dx,
            self.dy,
            self.z if z is None else z,
            self.origin_x + offset_x,
            self.origin_y + offset_y,
        )


@dataclass(frozen=True)
class DistanceTable:
    """Euclidean distances between all point pairs of two parallel grids.

    ``d[m, n]`` is the distance from source point n to target point m;
    ``dz`` is the shared axial separation |z_src - z_dst|.
    """

    d: np.ndarray
    dz: float


def build_plane_grid(nx, ny, dx, dy, z, origin=None) -> PlaneGrid:
    """Construct a grid; ``origin=None`` centers the samples on (0, 0).

    Centering places the sample cloud symmetrically about the z axis:
    origin = -(n - 1) * spacing / 2 per axis.
    """
    nx, ny = int(nx), int(ny)
    if origin is None:
        origin = (-(nx - 1) * dx / 2.0, -(ny - 1) * dy / 2.0)
    return PlaneGrid(nx, ny, float(dx), float(dy), float(z), float(origin[0]), float(origin[1]))


def pairwise_distances(src: PlaneGrid, dst: PlaneGrid) -> DistanceTable:
    """Distance table with rows over ``dst`` points and columns over ``src`` points."""
    sp = src.points()
    tp = dst.points()
    diff_x = tp[:, 0][:, None] - sp[:, 0][None, :]
    diff_y = tp[:, 1][:, None] - sp[:, 1][None, :]
    dz = abs(src.z - dst.z)
    d = np.sqrt(diff_x * diff_x + diff_y * diff_y + (tp[:, 2][:, None] - sp[:, 2][None, :]) ** 2)
    return DistanceTable(d=d, dz=dz)
