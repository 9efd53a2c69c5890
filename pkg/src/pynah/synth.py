"""Ground-truth field synthesis: plate modes, point monopoles, forward
propagation to the hologram plane, and measurement noise.

These generators replace measured data: a closed-form source velocity is
propagated forward with the same discrete operators the solvers invert,
and circular complex Gaussian noise is added at a prescribed SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractError
from .fields import PRESSURE, VELOCITY, ComplexField, PhysicalConstants
from .geometry import PlaneGrid
from .propagation import propagate_pressure, surface_pressure
from .scene import SceneConfig
from .validation import check_field

__all__ = [
    "PlateModeSpec",
    "NoiseSpec",
    "thin_plate_frequency",
    "plate_mode_velocity",
    "monopole_field",
    "forward_holography",
    "add_noise",
]

# Aluminum plate used for default modal frequencies.
PLATE_YOUNGS_PA = 69e9
PLATE_POISSON = 0.33
PLATE_DENSITY = 2700.0
PLATE_THICKNESS_M = 0.003


def thin_plate_frequency(
    m: int,
    n: int,
    lx: float,
    ly: float,
    youngs: float = PLATE_YOUNGS_PA,
    poisson: float = PLATE_POISSON,
    density: float = PLATE_DENSITY,
    thickness: float = PLATE_THICKNESS_M,
) -> float:
    """Simply supported thin-plate modal frequency in Hz.

    f_mn = (pi / 2) sqrt(D / (rho h)) ((m/lx)^2 + (n/ly)^2) with bending
    stiffness D = E h^3 / (12 (1 - nu^2)).
    """
    stiffness = youngs * thickness**3 / (12.0 * (1.0 - poisson**2))
    return (np.pi / 2.0) * np.sqrt(stiffness / (density * thickness)) * ((m / lx) ** 2 + (n / ly) ** 2)


@dataclass(frozen=True)
class PlateModeSpec:
    """Simply supported rectangular plate mode (m, n) on an lx-by-ly plate.

    The plate is centered on (0, 0). ``frequency_hz`` overrides the
    aluminum thin-plate default when given.
    """

    m: int
    n: int
    lx: float = 0.20
    ly: float = 0.80
    amplitude: float = 1.0
    frequency_hz: float | None = None

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ConfigurationError(f"modal indices must be >= 1, got ({self.m}, {self.n})")
        if self.lx <= 0 or self.ly <= 0:
            raise ConfigurationError("plate dimensions must be positive")
        if self.frequency_hz is not None and self.frequency_hz <= 0:
            raise ConfigurationError("frequency_hz must be positive")

    @property
    def frequency(self) -> float:
        if self.frequency_hz is not None:
            return self.frequency_hz
        return thin_plate_frequency(self.m, self.n, self.lx, self.ly)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive-noise description: target SNR in dB and RNG seed."""

    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise ConfigurationError(f"snr_db must be finite, got {self.snr_db}")


def plate_mode_velocity(spec: PlateModeSpec, grid: PlaneGrid) -> ComplexField:
    """Sample the (m, n) mode shape on ``grid`` as a complex velocity field."""
    half_x, half_y = spec.lx / 2.0, spec.ly / 2.0
    xs, ys = grid.xs, grid.ys
    tol = 1e-12
    if xs.min() < -half_x - tol or xs.max() > half_x + tol or ys.min() < -half_y - tol or ys.max() > half_y + tol:
        raise ConfigurationError(
            f"grid extent exceeds the {spec.lx} x {spec.ly} m plate footprint"
        )
    shape_x = np.sin(spec.m * np.pi * (xs + half_x) / spec.lx)
    shape_y = np.sin(spec.n * np.pi * (ys + half_y) / spec.ly)
    values = spec.amplitude * np.outer(shape_x, shape_y).ravel()
    omega = 2.0 * np.pi * spec.frequency
    return ComplexField(values.astype(np.complex128), grid, omega, VELOCITY)


def monopole_field(
    pos,
    strength: complex,
    omega: float,
    grid: PlaneGrid,
    constants: PhysicalConstants,
) -> tuple[ComplexField, ComplexField]:
    """Analytic free-field point-source pressure and normal velocity on a grid.

    Pressure is j*omega*rho*strength * exp(-jkd)/(4 pi d); the velocity is
    its axial Euler companion (1/(j*omega*rho)) dp/dz evaluated at the grid,
    which is the convention the plane propagators transport.
    """
    pos = np.asarray(pos, dtype=np.float64)
    if pos.shape != (3,):
        raise ContractError(f"monopole position must be a 3-vector, got shape {pos.shape}")
    pts = grid.points()
    delta = pts - pos[None, :]
    d = np.sqrt(np.sum(delta * delta, axis=1))
    if np.any(d <= 0.0):
        raise ConfigurationError("monopole position coincides with a grid sample")
    k = constants.wavenumber(omega)
    g = np.exp(-1j * k * d) / (4.0 * np.pi * d)
    p = 1j * omega * constants.rho * strength * g
    # dg/dz at the grid point, signed by the axial offset grid - source.
    dg_dz = -np.exp(-1j * k * d) * (1.0 + 1j * k * d) * delta[:, 2] / (4.0 * np.pi * d**3)
    v = strength * dg_dz
    return (
        ComplexField(p, grid, omega, PRESSURE),
        ComplexField(v, grid, omega, VELOCITY),
    )


def forward_holography(v_s: ComplexField, scene: SceneConfig) -> ComplexField:
    """Hologram pressure radiated by a source-plane velocity field."""
    check_field(v_s, kind=VELOCITY, name="v_s")
    if v_s.grid != scene.grid_s:
        raise ContractError("v_s is not attached to the scene's source grid")
    if scene.grid_s.z == scene.grid_h.z:
        raise ConfigurationError("source and hologram planes coincide")
    p_s = surface_pressure(v_s, scene.constants)
    return propagate_pressure(p_s, v_s, scene.grid_h, scene.constants)


def add_noise(p: ComplexField, spec: NoiseSpec) -> ComplexField:
    """Add circular complex white Gaussian noise at the requested SNR.

    Noise power is set from the mean signal power so the realized SNR is
    spec.snr_db in expectation; the draw is deterministic given the seed.
    """
    check_field(p, name="p")
    signal_power = float(np.mean(np.abs(p.values) ** 2))
    if signal_power == 0.0:
        raise ContractError("cannot set an SNR for an identically zero field")
    noise_power = signal_power * 10.0 ** (-spec.snr_db / 10.0)
    rng = np.random.default_rng(spec.seed)
    scale = np.sqrt(noise_power / 2.0)
    noise = scale * (rng.standard_normal(p.values.size) + 1j * rng.standard_normal(p.values.size))
    return p.with_values(p.values + noise)
