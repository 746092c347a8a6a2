"""Input checks shared by the estimators."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, check_X_y


def check_pairs(X) -> np.ndarray:
    """Validate an ``(n_samples, 2)`` array of integer (user, item) ids."""
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"X must have exactly two columns (user, item), got {X.shape[1]}")
    if np.issubdtype(X.dtype, np.integer):
        return X.astype(np.int64, copy=False)
    Xf = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(Xf)) or not np.all(Xf == np.round(Xf)):
        raise ValueError("user and item ids must be integers")
    return Xf.astype(np.int64)


def check_ratings(X, y) -> tuple[np.ndarray, np.ndarray]:
    X, y = check_X_y(X, y, dtype=None, y_numeric=True)
    X = check_pairs(X)
    y = np.asarray(y, dtype=np.float64)
    pairs = np.unique(X, axis=0)
    if len(pairs) != len(X):
        raise ValueError("X contains duplicate (user, item) pairs")
    return X, y


def check_positive(name: str, value, allow_zero: bool = False) -> None:
    if allow_zero:
        if not value >= 0:
            raise ValueError(f"{name} must be >= 0, got {value!r}")
    elif not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
