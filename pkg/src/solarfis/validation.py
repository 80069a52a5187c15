"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

from .errors import NumericError, ShapeError


def as_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a 1-d float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-d, got shape {arr.shape}")
    return arr


def as_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-d float64 array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-d, got shape {arr.shape}")
    return arr


def require_finite(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def require_same_length(a: np.ndarray, b: np.ndarray, names: str = "y and y_pred") -> None:
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"{names} differ in length: {a.shape[0]} vs {b.shape[0]}")


def readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out
