"""Complex-field error metrics with optional binary-mask support."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .geometry import PlaneGrid
from .validation import as_complex_vector

__all__ = ["BinaryMask", "nmse", "ncc", "NMSE_SENTINEL_DB"]

# Exact matches report this sentinel instead of -inf.
NMSE_SENTINEL_DB = -300.0


@dataclass(frozen=True)
class BinaryMask:
    """Per-point selection flags, row-major over a grid's enumeration."""

    flags: np.ndarray
    grid: PlaneGrid | None = None

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool).ravel()
        object.__setattr__(self, "flags", flags)
        if self.grid is not None and flags.size != self.grid.n_points:
            raise ContractError(
                f"mask has {flags.size} flags but grid has {self.grid.n_points} points"
            )
        if flags.size and not flags.any():
            raise ContractError("mask selects no points")


def _masked_pair(x_hat, x, mask):
    x_hat = as_complex_vector(x_hat, name="x_hat")
    x = as_complex_vector(x, name="x")
    if x_hat.size != x.size:
        raise ContractError(f"length mismatch: {x_hat.size} vs {x.size}")
    if mask is not None:
        flags = mask.flags if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool).ravel()
        if flags.size != x.size:
            raise ContractError(f"mask length {flags.size} does not match vectors ({x.size})")
        x_hat, x = x_hat[flags], x[flags]
    return x_hat, x


def nmse(x_hat, x, mask=None) -> float:
    """Normalized mean square error in dB: 10 log10(e^H e / x^H x).

    0 dB means the error energy equals the reference energy; an exact
    match reports the -300 dB sentinel.
    """
    x_hat, x = _masked_pair(x_hat, x, mask)
    denom = float(np.vdot(x, x).real)
    if denom == 0.0:
        raise ContractError("reference vector is zero on the evaluated points")
    e = x_hat - x
    num = float(np.vdot(e, e).real)
    if num == 0.0:
        return NMSE_SENTINEL_DB
    return float(10.0 * np.log10(num / denom))


def ncc(x_hat, x, mask=None) -> float:
    """Modulus of the normalized Hermitian correlation, in [0, 1].

    Equals 1 exactly when x_hat = c x for some nonzero complex c, so the
    value is invariant to global complex scaling of either argument.
    """
    x_hat, x = _masked_pair(x_hat, x, mask)
    norm_hat = float(np.linalg.norm(x_hat))
    norm_ref = float(np.linalg.norm(x))
    if norm_hat == 0.0 or norm_ref == 0.0:
        raise ContractError("ncc is undefined for a zero vector")
    value = abs(np.vdot(x_hat, x)) / (norm_hat * norm_ref)
    return float(min(value, 1.0))
