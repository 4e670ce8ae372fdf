"""Input validation helpers shared by the estimators and functions."""
from __future__ import annotations

import numpy as np

from .exceptions import ValidationError

MAX_WIDTH = 16
PMF_ATOL = 1e-12


def check_width(width, max_width: int = MAX_WIDTH) -> int:
    """Return ``width`` as int after checking ``1 <= width <= max_width``."""
    if isinstance(width, bool) or int(width) != width:
        raise ValidationError(f"word width must be an integer, got {width!r}")
    width = int(width)
    if not 1 <= width <= max_width:
        raise ValidationError(f"word width must lie in [1, {max_width}], got {width}")
    return width


def width_from_length(n: int) -> int:
    """Infer L from an array of length 2**L."""
    if n < 2 or n & (n - 1):
        raise ValidationError(f"length {n} is not 2**L for any L >= 1")
    return check_width(n.bit_length() - 1)


def check_pmf(pmf, width: int | None = None, atol: float = PMF_ATOL) -> np.ndarray:
    pmf = np.asarray(pmf, dtype=np.float64)
    if pmf.ndim != 1:
        raise ValidationError("a PMF must be one-dimensional")
    if width is None:
        width_from_length(pmf.size)
    elif pmf.size != 1 << width:
        raise ValidationError(f"PMF has {pmf.size} entries, expected {1 << width}")
    if not np.all(np.isfinite(pmf)) or np.any(pmf < 0):
        raise ValidationError("PMF entries must be finite and non-negative")
    total = float(np.sum(pmf))
    if abs(total - 1.0) > atol:
        raise ValidationError(f"PMF sums to {total!r}, not 1")
    return pmf


def check_probabilities(p, shape: tuple | None = None, upper: float = 1.0,
                        name: str = "probabilities") -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if shape is not None and p.shape != shape:
        raise ValidationError(f"{name} has shape {p.shape}, expected {shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > upper):
        raise ValidationError(f"{name} must lie in [0, {upper}]")
    return p


def check_tail(values, width: int | None = None) -> np.ndarray:
    """Validate a non-increasing tail function with range [0, 1]."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ValidationError("a tail must be one-dimensional")
    if width is None:
        width_from_length(values.size)
    elif values.size != 1 << width:
        raise ValidationError(f"tail has {values.size} entries, expected {1 << width}")
    if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
        raise ValidationError("tail values must lie in [0, 1]")
    if np.any(np.diff(values) > 0):
        raise ValidationError("tail must be non-increasing")
    return values


def check_word(x, width: int) -> int:
    if isinstance(x, bool) or int(x) != x:
        raise ValidationError(f"word must be an integer, got {x!r}")
    x = int(x)
    if not 0 <= x < 1 << width:
        raise ValidationError(f"word {x} outside [0, {(1 << width) - 1}]")
    return x


def check_samples(samples, width: int) -> np.ndarray:
    samples = np.asarray(samples)
    if samples.ndim != 1 or samples.size == 0:
        raise ValidationError("samples must be a non-empty 1-D sequence")
    if not np.issubdtype(samples.dtype, np.integer):
        if not np.all(np.mod(samples, 1) == 0):
            raise ValidationError("samples must be integers")
        samples = samples.astype(np.int64)
    if samples.min() < 0 or samples.max() >= 1 << width:
        raise ValidationError(f"samples must lie in [0, {(1 << width) - 1}]")
    return samples.astype(np.int64)
