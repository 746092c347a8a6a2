import os
from pathlib import Path

import numpy as np
import pytest

from rjmf.data import SparseRatings

MOVIELENS_CANDIDATES = [
    os.environ.get("RJMF_MOVIELENS", ""),
    str(Path(__file__).parent / "data" / "u.data"),
    str(Path.home() / "ml-100k" / "u.data"),
]


def movielens_path():
    for cand in MOVIELENS_CANDIDATES:
        if cand and Path(cand).is_file():
            return cand
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def full_2x2():
    # every cell of a 2 x 2 matrix observed
    return SparseRatings.from_arrays([0, 0, 1, 1], [0, 1, 0, 1], [4.0, 3.0, 5.0, 1.0])


def random_ratings(rng, n, p, density=1.0, low=1.0, high=5.0):
    mask = rng.random((n, p)) < density
    if not mask.any():
        mask[0, 0] = True
    users, items = np.nonzero(mask)
    vals = rng.uniform(low, high, size=len(users))
    return SparseRatings.from_arrays(users, items, vals, n=n, p=p)
