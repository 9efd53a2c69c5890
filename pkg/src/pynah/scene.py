"""Scene configuration: the plane stack and solver settings for one experiment.

A scene holds four families of parallel z-normal planes:

* ``grid_e``: equivalent-source plane, behind the vibrating surface;
* ``grid_s``: the actual source surface whose normal velocity is wanted;
* ``grid_h``: the hologram (microphone) plane;
* ``virtual_grids``: optional intermediate planes near the source where
  extra propagation-consistency constraints are imposed.

The default geometry places the source surface at z = 0, the equivalent
sources 5 cm behind it, the hologram 3.12 cm in front, and three virtual
planes at z = 0 and z = +/-1 mm, with 16x64-point source-side grids over
a 0.20 m x 0.80 m aperture and an 8x8 microphone grid over the same
aperture.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .fields import PhysicalConstants
from .geometry import PlaneGrid, build_plane_grid

__all__ = ["OptimizerSettings", "SceneConfig", "default_scene"]

# Default plane stack (meters).
Z_EQUIVALENT = -0.05
Z_SOURCE = 0.0
Z_HOLOGRAM = 0.0312
VIRTUAL_Z = (0.0, -0.001, 0.001)

# Default grids: source-side 16x64 at 12.5 mm pitch, microphones 8x8
# spanning the same 0.20 m x 0.80 m aperture.
SOURCE_SHAPE = (16, 64)
SOURCE_SPACING = (0.0125, 0.0125)
HOLOGRAM_SHAPE = (8, 8)
HOLOGRAM_SPACING = (0.025, 0.1)


@dataclass(frozen=True)
class OptimizerSettings:
    """Gradient-descent schedule for the sparse-field solver.

    ``mode`` selects the parametrization: ``"direct"`` optimizes the
    equivalent-source velocity vector itself; ``"network"`` optimizes the
    weights of a complex-valued network mapping hologram pressure to that
    vector. The learning rate drops by ``lr_factor`` (not below
    ``lr_floor``) after ``lr_patience`` epochs without improvement, and
    training stops after ``stop_patience`` stagnant epochs. "Improvement"
    means the best loss so far shrank by more than ``improvement_rtol``
    relative.
    """

    mode: str = "direct"
    lr: float = 0.01
    lr_factor: float = 0.1
    lr_patience: int = 200
    lr_floor: float = 0.001
    stop_patience: int = 50
    improvement_rtol: float = 1e-12
    max_epochs: int = 10000
    seed: int = 0
    hidden_sizes: tuple[int, ...] = (256, 512)
    init: str = "zeros"

    def __post_init__(self):
        if self.mode not in ("direct", "network"):
            raise ConfigurationError(f"optimizer mode must be 'direct' or 'network', got {self.mode!r}")
        if self.init not in ("zeros", "least_squares"):
            raise ConfigurationError(f"init must be 'zeros' or 'least_squares', got {self.init!r}")
        if not (self.lr > 0 and 0 < self.lr_factor < 1 and self.lr_floor > 0):
            raise ConfigurationError("learning-rate schedule values must be positive (factor in (0,1))")
        if self.max_epochs < 1:
            raise ConfigurationError("max_epochs must be >= 1")


@dataclass(frozen=True)
class SceneConfig:
    constants: PhysicalConstants
    omega: float
    grid_e: PlaneGrid
    grid_s: PlaneGrid
    grid_h: PlaneGrid
    virtual_grids: tuple[PlaneGrid, ...] = ()
    lam: float = 1e-6
    alpha: float = 0.01
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)

    def __post_init__(self):
        object.__setattr__(self, "virtual_grids", tuple(self.virtual_grids))
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise ConfigurationError(f"omega must be positive, got {self.omega}")
        if not (self.grid_e.z < self.grid_s.z <= self.grid_h.z):
            raise ConfigurationError(
                "plane ordering must be z_equivalent < z_source <= z_hologram, got "
                f"{self.grid_e.z}, {self.grid_s.z}, {self.grid_h.z}"
            )
        for i, grid in enumerate(self.virtual_grids, start=1):
            if grid.z == self.grid_e.z:
                raise ConfigurationError(f"virtual plane {i} coincides with the equivalent-source plane")
            if grid.z == self.grid_h.z:
                raise ConfigurationError(f"virtual plane {i} coincides with the hologram plane")
        if self.lam < 0:
            raise ConfigurationError(f"regularization weight must be >= 0, got {self.lam}")
        if not 0 < self.alpha <= 1:
            raise ConfigurationError(f"normalization alpha must be in (0, 1], got {self.alpha}")

    @property
    def n_virtual(self) -> int:
        return len(self.virtual_grids)

    @property
    def wavenumber(self) -> float:
        return self.constants.wavenumber(self.omega)

    def with_options(self, **changes) -> "SceneConfig":
        """Copy with replaced fields (dataclasses.replace passthrough)."""
        return replace(self, **changes)


def default_scene(
    frequency_hz: float,
    n_virtual: int = 3,
    lam: float = 1e-6,
    alpha: float = 0.01,
    optimizer: OptimizerSettings | None = None,
    constants: PhysicalConstants | None = None,
) -> SceneConfig:
    """Standard plane stack at the given frequency.

    ``n_virtual`` selects how many of the default virtual planes
    (z = 0, -1 mm, +1 mm, in that order) are active.
    """
    if not 0 <= n_virtual <= len(VIRTUAL_Z):
        raise ConfigurationError(f"n_virtual must be in [0, {len(VIRTUAL_Z)}], got {n_virtual}")
    nx, ny = SOURCE_SHAPE
    dx, dy = SOURCE_SPACING
    grid_s = build_plane_grid(nx, ny, dx, dy, Z_SOURCE)
    grid_e = build_plane_grid(nx, ny, dx, dy, Z_EQUIVALENT)
    grid_h = build_plane_grid(*HOLOGRAM_SHAPE, *HOLOGRAM_SPACING, Z_HOLOGRAM)
    virtual = tuple(build_plane_grid(nx, ny, dx, dy, z) for z in VIRTUAL_Z[:n_virtual])
    return SceneConfig(
        constants=constants or PhysicalConstants(),
        omega=2.0 * np.pi * frequency_hz,
        grid_e=grid_e,
        grid_s=grid_s,
        grid_h=grid_h,
        virtual_grids=virtual,
        lam=lam,
        alpha=alpha,
        optimizer=optimizer or OptimizerSettings(),
    )
