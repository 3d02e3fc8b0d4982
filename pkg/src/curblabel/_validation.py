"""Input checking helpers, in the spirit of ``sklearn.utils.validation``."""
import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ValidationError


def check_points(X, *, dims=3, allow_empty=True, name="points"):
    """Return ``X`` as a C-contiguous float64 array of shape (n, dims).

    Empty input is accepted (shape (0, dims)) unless ``allow_empty`` is False.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        if not allow_empty:
            raise ValidationError(f"{name}: empty input")
        return np.zeros((0, dims), dtype=np.float64)
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True,
                    input_name=name)
    if X.shape[1] != dims:
        raise ValidationError(f"{name}: expected {dims} columns, got {X.shape[1]}")
    return np.ascontiguousarray(X)


def check_positive(value, name, *, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValidationError(f"{name} must be a finite number, got {value!r}")
    if value < 0 or (strict and value == 0):
        bound = "> 0" if strict else ">= 0"
        raise ValidationError(f"{name} must be {bound}, got {value!r}")
    return float(value)


def check_count(value, name, *, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value!r}")
    return int(value)
