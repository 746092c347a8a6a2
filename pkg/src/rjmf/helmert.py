"""Helmert orthogonal transform and the birth/death dimension-matching maps.

Row 1 of the ``m x m`` matrix ``A`` is ``1/sqrt(m)`` times the all-ones
vector; row ``i >= 2`` is ``(1, ..., 1, -(i-1), 0, ..., 0) / sqrt(i(i-1))``.
``A`` is never materialized: both directions cost O(m) per vector through
prefix/suffix sums. All functions act on the last axis, so a whole factor
matrix transforms row by row in one call.
"""
from __future__ import annotations

import numpy as np


def _scales(m: int) -> np.ndarray:
    i = np.arange(2, m + 1, dtype=np.float64)
    return 1.0 / np.sqrt(i * (i - 1.0))


def apply(x) -> np.ndarray:
    """``y = A x`` along the last axis."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[-1]
    if m < 1:
        raise ValueError("transform size must be >= 1")
    y = np.empty_like(x)
    csum = np.cumsum(x, axis=-1)
    y[..., 0] = csum[..., -1] / np.sqrt(m)
    if m > 1:
        i = np.arange(2, m + 1, dtype=np.float64)
        y[..., 1:] = (csum[..., :-1] - (i - 1.0) * x[..., 1:]) * _scales(m)
    return y


def invert(y) -> np.ndarray:
    """``x = A^T y``, the exact inverse of :func:`apply`."""
    y = np.asarray(y, dtype=np.float64)
    m = y.shape[-1]
    if m < 1:
        raise ValueError("transform size must be >= 1")
    x = np.broadcast_to(y[..., :1] / np.sqrt(m), y.shape).copy()
    if m > 1:
        c = y[..., 1:] * _scales(m)  # c[i-2] pairs with row i
        # x_j += sum_{i > j} c_i  (rows whose leading block covers column j)
        tail = np.cumsum(c[..., ::-1], axis=-1)[..., ::-1]
        x[..., :-1] += tail
        # x_j -= (j-1) c_j for j >= 2
        j = np.arange(2, m + 1, dtype=np.float64)
        x[..., 1:] -= (j - 1.0) * c
    return x


def matrix(m: int) -> np.ndarray:
    """Dense ``A`` for diagnostics and tests."""
    return apply(np.eye(m)).T


def birth_map(x, u) -> np.ndarray:
    """Concatenate ``(x, u)`` along the last axis and apply ``A`` of the joint size."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if u.shape[-1] < 1:
        raise ValueError("birth requires at least one auxiliary coordinate")
    return apply(np.concatenate([x, u], axis=-1))


def death_map(xp, k_keep: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert ``A`` and split into the retained head (``k_keep``) and the discarded tail."""
    xp = np.asarray(xp, dtype=np.float64)
    if not 1 <= k_keep < xp.shape[-1]:
        raise ValueError(f"death must keep between 1 and {xp.shape[-1] - 1} coordinates, got {k_keep}")
    full = invert(xp)
    return full[..., :k_keep], full[..., k_keep:]
