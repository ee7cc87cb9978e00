"""Input checks shared by the estimator and the sweep drivers."""
from __future__ import annotations

import numbers

import numpy as np

__all__ = ["check_waveforms", "check_positive", "check_nonnegative", "check_choice"]


def check_waveforms(X, n_samples: int) -> tuple[np.ndarray, bool]:
    """Coerce ``X`` to a 2-d complex array of waveforms with ``n_samples`` columns.

    Returns the array and whether the input was a single 1-d waveform.
    Complex input is allowed, unlike :func:`sklearn.utils.check_array`.
    """
    X = np.asarray(X)
    if X.dtype == object or not np.issubdtype(X.dtype, np.number):
        raise TypeError("waveforms must be numeric")
    single = X.ndim == 1
    X = np.atleast_2d(X).astype(complex, copy=False)
    if X.ndim != 2:
        raise ValueError(f"expected 1-d or 2-d waveforms, got shape {X.shape}")
    if X.shape[1] != n_samples:
        raise ValueError(f"waveforms have {X.shape[1]} samples; the fitted grid has {n_samples}")
    if not np.all(np.isfinite(X)):
        raise ValueError("waveforms contain NaN or inf")
    return X, single


def check_positive(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_nonnegative(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite number >= 0, got {value!r}")
    return float(value)


def check_choice(name: str, value, choices):
    if value not in choices:
        raise ValueError(f"{name} must be one of {sorted(map(str, choices))}, got {value!r}")
    return value
