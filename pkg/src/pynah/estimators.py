"""Scikit-learn style estimators wrapping the two reconstruction methods.

Both estimators are fitted to a single hologram pressure measurement
(an array of M complex values or a ComplexField on the scene's hologram
grid) and expose the reconstructed fields as trailing-underscore
attributes, so they compose with sklearn tooling (``get_params``,
``set_params``, ``clone``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ContractError
from .esm import (
    build_esm_matrices,
    default_candidates,
    hologram_mae,
    reconstruct_velocity_esm,
    select_lambda,
)
from .fields import PRESSURE, ComplexField
from .metrics import ncc, nmse
from .scene import SceneConfig
from .sfd import optimize
from .validation import as_complex_vector

__all__ = ["CompressiveESM", "SparseFieldReconstructor"]


def _as_hologram_field(p_h, scene: SceneConfig) -> ComplexField:
    if isinstance(p_h, ComplexField):
        if p_h.grid != scene.grid_h:
            raise ContractError("pressure field is not attached to the scene's hologram grid")
        return p_h
    values = as_complex_vector(p_h, n=scene.grid_h.n_points, name="p_h")
    return ComplexField(values, scene.grid_h, scene.omega, PRESSURE)


class CompressiveESM(BaseEstimator):
    """Sparse monopole fit to a hologram measurement.

    Parameters
    ----------
    scene : SceneConfig
        Plane stack, frequency and medium.
    lambdas : sequence of float, optional
        Regularization candidates for the sweep; defaults to five values
        evenly spaced in [0.005, 0.1].

    Attributes (after fit)
    ----------
    lambda_ : float, the selected regularization weight.
    solution_ : LassoSolution with the fitted strengths.
    q_ : complex ndarray, the fitted source-strength vector.
    v_s_ : ComplexField, reconstructed source-plane velocity.
    hologram_mae_ : float, mean absolute hologram residual.
    """

    def __init__(self, scene: SceneConfig = None, lambdas=None):
        self.scene = scene
        self.lambdas = lambdas

    def fit(self, p_h, y=None):
        if self.scene is None:
            raise ContractError("CompressiveESM needs a scene")
        field = _as_hologram_field(p_h, self.scene)
        candidates = default_candidates() if self.lambdas is None else self.lambdas
        self.matrices_ = build_esm_matrices(self.scene)
        self.lambda_, self.solution_ = select_lambda(field.values, self.matrices_, candidates)
        self.q_ = self.solution_.q_hat
        self.v_s_ = reconstruct_velocity_esm(
            self.solution_, self.matrices_, self.scene.constants, self.scene.omega, self.scene.grid_s
        )
        self.hologram_mae_ = hologram_mae(self.solution_, field.values, self.matrices_)
        return self

    def predict_hologram(self) -> np.ndarray:
        """Hologram pressure radiated by the fitted sources."""
        self._check_fitted()
        return self.matrices_.g_h @ self.q_

    def predict_source(self) -> ComplexField:
        self._check_fitted()
        return self.v_s_

    def score(self, p_h, y=None) -> float:
        """Negative hologram NMSE in dB (higher is better)."""
        self._check_fitted()
        field = _as_hologram_field(p_h, self.scene)
        return -nmse(self.predict_hologram(), field.values)

    def _check_fitted(self):
        if not hasattr(self, "solution_"):
            raise ContractError("estimator is not fitted; call fit first")


class SparseFieldReconstructor(BaseEstimator):
    """Self-supervised equivalent-source reconstruction from one hologram.

    Parameters
    ----------
    scene : SceneConfig
        Plane stack (including any virtual planes), regularization
        weight and optimizer settings.

    Attributes (after fit)
    ----------
    report_ : SolverReport with traces and stopping information.
    v_e_ : ComplexField, fitted equivalent-source velocity.
    v_s_ : ComplexField, reconstructed source-plane velocity.
    p_h_ : ComplexField, hologram prediction of the fitted sources.
    source_nmse_db_, source_ncc_ : float, set when truth was supplied.
    """

    def __init__(self, scene: SceneConfig = None):
        self.scene = scene

    def fit(self, p_h, y=None, truth_v_s: ComplexField | None = None):
        if self.scene is None:
            raise ContractError("SparseFieldReconstructor needs a scene")
        field = _as_hologram_field(p_h, self.scene)
        self.report_ = optimize(field, self.scene, truth_v_s=truth_v_s)
        self.v_e_ = self.report_.v_e_hat
        self.v_s_ = self.report_.v_s_hat
        self.p_h_ = self.report_.p_h_hat
        if truth_v_s is not None:
            self.source_nmse_db_ = nmse(self.v_s_.values, truth_v_s.values)
            self.source_ncc_ = ncc(self.v_s_.values, truth_v_s.values)
        return self

    def predict_hologram(self) -> np.ndarray:
        self._check_fitted()
        return self.p_h_.values

    def predict_source(self) -> ComplexField:
        self._check_fitted()
        return self.v_s_

    def score(self, p_h, y=None) -> float:
        """Negative hologram-fit NMSE in dB (higher is better)."""
        self._check_fitted()
        field = _as_hologram_field(p_h, self.scene)
        return -nmse(self.p_h_.values, field.values)

    def _check_fitted(self):
        if not hasattr(self, "report_"):
            raise ContractError("estimator is not fitted; call fit first")
