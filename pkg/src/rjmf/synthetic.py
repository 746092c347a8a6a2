"""Synthetic low-rank rating data with known latent dimension."""
from __future__ import annotations

import math

import numpy as np

from .data import SparseRatings


def synthetic_factors(n: int, p: int, k_true: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # mean sqrt(3/k) puts the average rating at 3; a coefficient of variation of
    # 1/2 keeps every latent direction well above the noise floor.
    mean = math.sqrt(3.0 / k_true)
    U = mean * (1.0 + 0.5 * rng.standard_normal((n, k_true)))
    V = mean * (1.0 + 0.5 * rng.standard_normal((p, k_true)))
    return U, V


def gen_synthetic(n: int, p: int, k_true: int, noise_sd: float, density: float, seed=None,
                  return_factors: bool = False):
    """Ratings ``u_i . v_j + noise`` observed at random with probability ``density``.

    The noiseless matrix is rescaled (no shift, so its rank is preserved) to
    average 3, then clipped into ``[1, 5]``. Every cell is kept independently
    with probability ``density``; if that leaves nothing, one cell is kept.
    """
    if k_true < 1:
        raise ValueError("k_true must be >= 1")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must be in (0, 1]")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    U, V = synthetic_factors(n, p, k_true, rng)
    clean = U @ V.T
    scale = 3.0 / clean.mean()
    clean *= scale
    noisy = clean + noise_sd * rng.standard_normal(clean.shape)
    mask = rng.random((n, p)) < density
    if not mask.any():
        mask[rng.integers(n), rng.integers(p)] = True
    users, items = np.nonzero(mask)
    ratings = np.clip(noisy[users, items], 1.0, 5.0)
    out = SparseRatings(n, p, users, items, ratings, np.arange(1, n + 1), np.arange(1, p + 1))
    if return_factors:
        s = math.sqrt(scale)
        return out, (s * U, s * V, clean)
    return out
