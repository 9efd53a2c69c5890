"""Discretized boundary-integral propagation between parallel planes.

:func:`green_kernels` exposes the free-field kernel and two derivative
forms (axial separation dz = |z_src - z_dst| >= 0)::

    g     =  exp(-jkd) / (4 pi d)
    g_dn  = -exp(-jkd) (1 + jkd) dz / (4 pi d^3)
    g_dnn =  exp(-jkd) (-k^2 d + 3 + 3jkd) dz / (4 pi d^3)

``g_dn`` is the z-derivative of ``g`` taken at the *target* point of an
ascending plane pair; it is what Euler's equation needs to turn a
monopole sum into a normal velocity (see the equivalent-source module).
The surface-integral propagators below need the companion forms: the
derivative at the *source* point (``-g_dn``) for the pressure dipole
term, and the mixed source/target second derivative for the velocity
kernel. Both are derived from ``g`` and used internally; the plane
transfer they produce reproduces analytic point-source fields, which is
the correctness anchor for this module (the suite checks it against a
closed-form monopole under grid refinement).

Three discrete operators act over a grid with cell area dLx*dLy:

* :func:`surface_pressure` - pressure on a vibrating plane from its own
  normal velocity (on-surface sum; coincident points use a regularized
  self term proportional to omega^2 / c).
* :func:`propagate_pressure` - pressure on a second plane from the
  (pressure, velocity) pair on a source plane.
* :func:`propagate_velocity` - normal velocity on a second plane from
  the same pair.

Sign convention: a stored velocity field is the conjugate-normal
component, i.e. the pair (p, v) with v = (1/jwp) dp/dz propagates
consistently through these operators. All operators are exactly linear
in their stacked complex inputs, so chains of them collapse into dense
matrices; :func:`assemble_path_operator` builds those matrices for the
propagation paths used by the reconstruction solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractError, SingularityError
from .fields import PRESSURE, VELOCITY, ComplexField, PhysicalConstants
from .geometry import PlaneGrid, pairwise_distances
from .scene import SceneConfig
from .validation import check_field, check_same_plane

__all__ = [
    "green_kernels",
    "surface_pressure",
    "propagate_pressure",
    "propagate_velocity",
    "PropagatorMatrix",
    "assemble_path_operator",
    "surface_pressure_matrix",
    "pressure_kernel_matrices",
    "velocity_kernel_matrices",
]

FOUR_PI = 4.0 * np.pi


def green_kernels(d, dz, k):
    """Free-field kernel and its first and second z-normal derivatives.

    Parameters
    ----------
    d : float or ndarray
        Point-pair distance(s) in meters, strictly positive.
    dz : float
        Axial plane separation |z_src - z_dst| >= 0.
    k : float
        Wavenumber omega / c >= 0.

    Returns
    -------
    (g, g_dn, g_dnn) : complex or ndarray triples
    """
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0.0):
        raise SingularityError("kernel evaluated at zero distance; route coincident points to the self term")
    if dz < 0 or k < 0:
        raise ContractError(f"dz and k must be non-negative, got dz={dz}, k={k}")
    phase = np.exp(-1j * k * d)
    g = phase / (FOUR_PI * d)
    d3 = FOUR_PI * d**3
    g_dn = -phase * (1.0 + 1j * k * d) * dz / d3
    g_dnn = phase * (-(k**2) * d + 3.0 + 3j * k * d) * dz / d3
    if np.ndim(g) == 0:
        return complex(g), complex(g_dn), complex(g_dnn)
    return g, g_dn, g_dnn


def _source_dipole_kernel(d, dz, k):
    """Derivative of g at the source point along +z for an ascending pair.

    Equals ``-g_dn``; strictly zero when the planes coincide (dz = 0).
    """
    return np.exp(-1j * k * d) * (1.0 + 1j * k * d) * dz / (FOUR_PI * d**3)


def _mixed_dipole_kernel(d, dz, k):
    """Mixed source/target second z-derivative of g.

    d/dz_target of the source dipole kernel; drives the pressure term of
    the velocity propagator.
    """
    kd = k * d
    bracket = (1.0 + 1j * kd) + (dz / d) ** 2 * (kd * kd - 3.0 - 3j * kd)
    return np.exp(-1j * k * d) * bracket / (FOUR_PI * d**3)


def surface_pressure_matrix(grid: PlaneGrid, omega: float, constants: PhysicalConstants) -> np.ndarray:
    """Dense matrix mapping on-plane velocity to on-plane pressure."""
    k = constants.wavenumber(omega)
    area = grid.area_element
    d = pairwise_distances(grid, grid).d
    n = grid.n_points
    eye = np.eye(n, dtype=bool)
    mat = np.empty((n, n), dtype=np.complex128)
    off = ~eye
    d_off = d[off]
    mat[off] = -(1.0 / (2.0 * np.pi)) * 1j * omega * constants.rho * np.exp(-1j * k * d_off) / d_off * area
    mat[eye] = -(1.0 / (2.0 * np.pi)) * (omega**2 / constants.c) * constants.rho * area
    return mat


def pressure_kernel_matrices(src: PlaneGrid, dst: PlaneGrid, omega: float, constants: PhysicalConstants, area: float | None = None):
    """Kernel matrices (K_p, K_v) so that p_dst = K_p @ p_src + K_v @ v_src.

    ``area`` overrides the source grid's quadrature cell (used by scaling
    tests); by default it is ``src.area_element``.
    """
    if src.z == dst.z:
        raise SingularityError("source and target planes coincide; use surface_pressure instead")
    k = constants.wavenumber(omega)
    area = src.area_element if area is None else area
    table = pairwise_distances(src, dst)
    g, _, _ = green_kernels(table.d, table.dz, k)
    k_p = _source_dipole_kernel(table.d, table.dz, k) * area
    k_v = -(1j * omega * constants.rho) * g * area
    return k_p, k_v


def velocity_kernel_matrices(src: PlaneGrid, dst: PlaneGrid, omega: float, constants: PhysicalConstants, area: float | None = None):
    """Kernel matrices (K_p, K_v) so that v_dst = K_p @ p_src + K_v @ v_src."""
    if src.z == dst.z:
        raise SingularityError("source and target planes coincide; velocity propagation needs dz > 0")
    k = constants.wavenumber(omega)
    area = src.area_element if area is None else area
    table = pairwise_distances(src, dst)
    if np.any(table.d <= 0.0):
        raise SingularityError("kernel evaluated at zero distance")
    k_p = _mixed_dipole_kernel(table.d, table.dz, k) * area / (1j * omega * constants.rho)
    k_v = _source_dipole_kernel(table.d, table.dz, k) * area
    return k_p, k_v


def _check_output(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise ContractError(f"{what} produced non-finite values")
    return values


def surface_pressure(v: ComplexField, constants: PhysicalConstants) -> ComplexField:
    """Pressure on a plane radiated by that plane's own normal velocity."""
    check_field(v, kind=VELOCITY, name="v")
    mat = surface_pressure_matrix(v.grid, v.omega, constants)
    return ComplexField(_check_output(mat @ v.values, "surface_pressure"), v.grid, v.omega, PRESSURE)


def propagate_pressure(p: ComplexField, v: ComplexField, dst: PlaneGrid, constants: PhysicalConstants) -> ComplexField:
    """Pressure on ``dst`` from the (pressure, velocity) pair on the source plane."""
    check_field(p, kind=PRESSURE, name="p")
    check_field(v, kind=VELOCITY, name="v")
    check_same_plane(p, v)
    k_p, k_v = pressure_kernel_matrices(p.grid, dst, p.omega, constants)
    return ComplexField(_check_output(k_p @ p.values + k_v @ v.values, "propagate_pressure"), dst, p.omega, PRESSURE)


def propagate_velocity(p: ComplexField, v: ComplexField, dst: PlaneGrid, constants: PhysicalConstants) -> ComplexField:
    """Normal velocity on ``dst`` from the (pressure, velocity) pair on the source plane."""
    check_field(p, kind=PRESSURE, name="p")
    check_field(v, kind=VELOCITY, name="v")
    check_same_plane(p, v)
    k_p, k_v = velocity_kernel_matrices(p.grid, dst, p.omega, constants)
    return ComplexField(_check_output(k_p @ p.values + k_v @ v.values, "propagate_velocity"), dst, p.omega, VELOCITY)


@dataclass(frozen=True)
class PropagatorMatrix:
    """Dense linear map between stacked plane fields at one frequency."""

    entries: np.ndarray
    omega: float
    src_grid: PlaneGrid
    dst_grid: PlaneGrid
    path: str

    @property
    def shape(self):
        return self.entries.shape

    def __matmul__(self, vec: np.ndarray) -> np.ndarray:
        return self.entries @ vec


def _virtual_index(path: str, n_virtual: int) -> int:
    try:
        idx = int(path.split(":", 1)[1])
    except (IndexError, ValueError):
        raise ConfigurationError(f"malformed virtual path tag {path!r}; expected 'via_virtual:<i>'") from None
    if not 1 <= idx <= n_virtual:
        raise ContractError(f"virtual plane index {idx} out of range 1..{n_virtual}")
    return idx


def assemble_path_operator(scene: SceneConfig, path: str) -> PropagatorMatrix:
    """Collapse a propagation chain into one dense matrix acting on v_E.

    Supported paths:

    * ``"direct"`` - equivalent plane to hologram pressure.
    * ``"via_virtual:<i>"`` - equivalent plane to hologram pressure
      through the i-th virtual plane (1-based).
    * ``"source_velocity"`` - equivalent plane to source-plane velocity.
    * ``"esm_monopole"`` - monopole-superposition map from source
      strengths to hologram pressure (cell area folded in, no j*omega*rho
      factor; that factor lives in the strength vector).
    """
    omega, constants = scene.omega, scene.constants
    grid_e, grid_h = scene.grid_e, scene.grid_h

    if path == "esm_monopole":
        table = pairwise_distances(grid_e, grid_h)
        g, _, _ = green_kernels(table.d, table.dz, constants.wavenumber(omega))
        return PropagatorMatrix(g * grid_e.area_element, omega, grid_e, grid_h, path)

    t1 = surface_pressure_matrix(grid_e, omega, constants)
    if path == "direct":
        if grid_e.z == grid_h.z:
            raise ConfigurationError("equivalent and hologram planes coincide")
        k_p, k_v = pressure_kernel_matrices(grid_e, grid_h, omega, constants)
        return PropagatorMatrix(k_p @ t1 + k_v, omega, grid_e, grid_h, path)
    if path == "source_velocity":
        if grid_e.z == scene.grid_s.z:
            raise ConfigurationError("equivalent and source planes coincide")
        k_p, k_v = velocity_kernel_matrices(grid_e, scene.grid_s, omega, constants)
        return PropagatorMatrix(k_p @ t1 + k_v, omega, grid_e, scene.grid_s, path)
    if path.startswith("via_virtual"):
        idx = _virtual_index(path, scene.n_virtual)
        grid_v = scene.virtual_grids[idx - 1]
        if grid_e.z == grid_v.z or grid_v.z == grid_h.z:
            raise ConfigurationError(f"virtual plane {idx} coincides with a chained plane")
        p2_p, p2_v = pressure_kernel_matrices(grid_e, grid_v, omega, constants)
        v3_p, v3_v = velocity_kernel_matrices(grid_e, grid_v, omega, constants)
        pressure_at_v = p2_p @ t1 + p2_v
        velocity_at_v = v3_p @ t1 + v3_v
        h_p, h_v = pressure_kernel_matrices(grid_v, grid_h, omega, constants)
        return PropagatorMatrix(h_p @ pressure_at_v + h_v @ velocity_at_v, omega, grid_e, grid_h, path)
    raise ConfigurationError(f"unknown propagation path {path!r}")
