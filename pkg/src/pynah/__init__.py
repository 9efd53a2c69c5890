"""Planar near-field acoustic holography toolkit.

Reconstructs vibrating-surface normal-velocity fields from near-field
hologram pressure measurements. Ships a discretized boundary-integral
propagation model, a compressive equivalent-source baseline, and a
self-supervised sparse-field solver with virtual-plane constraints,
plus scikit-learn style estimator wrappers and a config-driven CLI.
"""

from .errors import ConfigurationError, ContractError, SingularityError, SolverError
from .esm import (
    EsmMatrices,
    LassoSolution,
    build_esm_matrices,
    default_candidates,
    reconstruct_velocity_esm,
    select_lambda,
    solve_cesm,
)
from .estimators import CompressiveESM, SparseFieldReconstructor
from .fields import PRESSURE, VELOCITY, ComplexField, PhysicalConstants
from .geometry import DistanceTable, PlaneGrid, build_plane_grid, pairwise_distances
from .metrics import BinaryMask, ncc, nmse
from .propagation import (
    PropagatorMatrix,
    assemble_path_operator,
    green_kernels,
    propagate_pressure,
    propagate_velocity,
    surface_pressure,
)
from .scene import OptimizerSettings, SceneConfig, default_scene
from .sfd import SolverReport, optimize, reconstruct_source
from .synth import (
    NoiseSpec,
    PlateModeSpec,
    add_noise,
    forward_holography,
    monopole_field,
    plate_mode_velocity,
    thin_plate_frequency,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "PhysicalConstants",
    "PlaneGrid",
    "DistanceTable",
    "PropagatorMatrix",
    "SceneConfig",
    "OptimizerSettings",
    "SolverReport",
    "PlateModeSpec",
    "NoiseSpec",
    "BinaryMask",
    "EsmMatrices",
    "LassoSolution",
    "CompressiveESM",
    "SparseFieldReconstructor",
    "ConfigurationError",
    "ContractError",
    "SingularityError",
    "SolverError",
    "PRESSURE",
    "VELOCITY",
    "build_plane_grid",
    "pairwise_distances",
    "green_kernels",
    "surface_pressure",
    "propagate_pressure",
    "propagate_velocity",
    "assemble_path_operator",
    "plate_mode_velocity",
    "monopole_field",
    "forward_holography",
    "add_noise",
    "thin_plate_frequency",
    "build_esm_matrices",
    "solve_cesm",
    "select_lambda",
    "default_candidates",
    "reconstruct_velocity_esm",
    "optimize",
    "reconstruct_source",
    "nmse",
    "ncc",
    "default_scene",
]
