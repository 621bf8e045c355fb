"""Small input-validation helpers shared by the estimators and samplers."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_event_times(x, name: str = "times", allow_empty: bool = True) -> np.ndarray:
    """Coerce to a sorted 1-D float array of finite times."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if arr.size == 0:
        if not allow_empty:
            raise ValidationError(f"{name} must be non-empty")
        return arr
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    if np.any(np.diff(arr) < 0):
        raise ValidationError(f"{name} must be sorted ascending")
    return arr


def check_positive(name: str, value: float, allow_zero: bool = False) -> float:
    v = float(value)
    if not np.isfinite(v):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if v < 0 or (v == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got {value!r}")
    return v
