import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rjmf import helmert


def helmert_rows(m):
    """Dense matrix written directly from the row formulas."""
    A = np.zeros((m, m))
    A[0, :] = 1.0 / math.sqrt(m)
    for i in range(2, m + 1):
        A[i - 1, : i - 1] = 1.0 / math.sqrt(i * (i - 1))
        A[i - 1, i - 1] = -(i - 1) / math.sqrt(i * (i - 1))
    return A


def test_size_two():
    x1, x2 = 0.7, -1.9
    y = helmert.apply([x1, x2])
    assert np.allclose(y, [(x1 + x2) / math.sqrt(2), (x1 - x2) / math.sqrt(2)], atol=1e-15)


@pytest.mark.parametrize("m", [1, 2, 5, 17])
def test_constant_vector(m):
    y = helmert.apply(np.full(m, 2.5))
    expected = np.zeros(m)
    expected[0] = math.sqrt(m) * 2.5
    assert np.allclose(y, expected, atol=1e-12)
    assert np.allclose(helmert.invert(expected), np.full(m, 2.5), atol=1e-12)


def test_norm_preserved(rng):
    A = helmert_rows(5)
    assert np.abs(A @ A.T - np.eye(5)).max() < 1e-12
    x = rng.normal(size=5)
    assert abs(np.linalg.norm(helmert.apply(x)) - np.linalg.norm(x)) < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3, 10, 50])
def test_invert_apply_round_trip(rng, m):
    x = rng.normal(size=m)
    assert np.abs(helmert.invert(helmert.apply(x)) - x).max() < 1e-12


def test_size_one_is_identity():
    assert helmert.apply([3.25]).tolist() == [3.25]
    assert helmert.invert([3.25]).tolist() == [3.25]


@pytest.mark.parametrize("m", [1, 2, 3, 4, 7, 12, 33, 64])
def test_matches_row_formulas(m, rng):
    assert np.allclose(helmert.matrix(m), helmert_rows(m), atol=1e-14)
    x = rng.normal(size=m)
    assert np.allclose(helmert.apply(x), helmert_rows(m) @ x, atol=1e-12)
    assert np.allclose(helmert.invert(x), helmert_rows(m).T @ x, atol=1e-12)


@pytest.mark.parametrize("m", range(1, 11))
def test_unit_determinant(m):
    assert abs(abs(np.linalg.det(helmert.matrix(m))) - 1.0) < 1e-10


def test_acts_on_rows_of_a_matrix(rng):
    X = rng.normal(size=(6, 4))
    assert np.allclose(helmert.apply(X), X @ helmert_rows(4).T, atol=1e-12)


def test_birth_examples():
    assert np.allclose(helmert.birth_map([1.0, 1.0], [1.0]), [math.sqrt(3), 0, 0], atol=1e-12)
    out = helmert.birth_map([-2.0], [0.0])
    assert np.linalg.norm(out) == pytest.approx(2.0)


def test_birth_requires_auxiliary():
    with pytest.raises(ValueError):
        helmert.birth_map([1.0], np.zeros(0))


def test_death_examples(rng):
    x, u = rng.normal(size=3), rng.normal(size=2)
    head, tail = helmert.death_map(helmert.birth_map(x, u), 3)
    assert np.abs(head - x).max() < 1e-12 and np.abs(tail - u).max() < 1e-12
    head, tail = helmert.death_map([math.sqrt(3), 0, 0], 2)
    assert np.allclose(head, [1, 1]) and np.allclose(tail, [1])
    head, tail = helmert.death_map(helmert.birth_map([-2.0], [0.0]), 1)
    assert head.tolist() == pytest.approx([-2.0]) and tail.tolist() == pytest.approx([0.0])


@pytest.mark.parametrize("keep", [0, 3])
def test_death_requires_shrink(keep):
    with pytest.raises(ValueError):
        helmert.death_map([1.0, 2.0, 3.0], keep)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 64), elements=st.floats(-1e3, 1e3)))
def test_norm_and_round_trip_property(x):
    y = helmert.apply(x)
    scale = max(1.0, np.linalg.norm(x))
    assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-12 * scale
    assert np.abs(helmert.invert(y) - x).max() <= 1e-12 * scale
