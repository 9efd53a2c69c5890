"""Input validation helpers used by operators and estimators."""

from __future__ import annotations

import numpy as np

from .errors import ContractError
from .fields import ComplexField

__all__ = [
    "check_finite",
    "check_field",
    "check_same_plane",
    "as_complex_vector",
]


def check_finite(array: np.ndarray, name: str) -> np.ndarray:
    array = np.asarray(array)
    if not np.all(np.isfinite(array)):
        raise ContractError(f"{name} contains non-finite entries")
    return array


def check_field(field: ComplexField, kind: str | None = None, name: str = "field") -> ComplexField:
    if not isinstance(field, ComplexField):
        raise ContractError(f"{name} must be a ComplexField, got {type(field).__name__}")
    if kind is not None and field.kind != kind:
        raise ContractError(f"{name} must have kind {kind!r}, got {field.kind!r}")
    check_finite(field.values, f"{name}.values")
    return field


def check_same_plane(a: ComplexField, b: ComplexField) -> None:
    """Require two fields to share grid and angular frequency."""
    if a.grid != b.grid:
        raise ContractError("fields are attached to different grids")
    if a.omega != b.omega:
        raise ContractError(f"fields have different omega: {a.omega} vs {b.omega}")


def as_complex_vector(x, n: int | None = None, name: str = "input") -> np.ndarray:
    """Coerce array-like or ComplexField input to a flat complex128 vector."""
    if isinstance(x, ComplexField):
        values = x.values
    else:
        values = np.asarray(x, dtype=np.complex128).ravel()
    if n is not None and values.size != n:
        raise ContractError(f"{name} must have length {n}, got {values.size}")
    return check_finite(values, name)
