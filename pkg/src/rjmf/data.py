"""Rating data: MovieLens parsing, indexed sparse storage, splits and RMSE."""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, NamedTuple

import numpy as np

from .exceptions import (
    DuplicateRatingError,
    EmptyDatasetError,
    ParseError,
    UndefinedMetricError,
)


class RatingTriple(NamedTuple):
    user: int
    item: int
    rating: float


def _group_index(keys: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    # stable sort keeps file order within a group
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=size)
    ptr = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, order


@dataclass(frozen=True, eq=False)
class SparseRatings:
    """Observed ratings over a dense ``n x p`` index space.

    ``users``, ``items`` and ``ratings`` are parallel arrays of internal
    0-based indices and values. ``user_ids`` / ``item_ids`` map internal
    indices back to the ids found in the source file. Train and test halves
    of a split share the same index space, so ``n`` and ``p`` may exceed the
    number of users/items that actually carry a rating.
    """

    n: int
    p: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    user_ids: np.ndarray
    item_ids: np.ndarray
    _user_ptr: np.ndarray = field(init=False, repr=False)
    _user_order: np.ndarray = field(init=False, repr=False)
    _item_ptr: np.ndarray = field(init=False, repr=False)
    _item_order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        users = np.ascontiguousarray(self.users, dtype=np.int64)
        items = np.ascontiguousarray(self.items, dtype=np.int64)
        ratings = np.ascontiguousarray(self.ratings, dtype=np.float64)
        if not (users.shape == items.shape == ratings.shape) or users.ndim != 1:
            raise ValueError("users, items and ratings must be 1-d arrays of equal length")
        if len(users) and (users.min() < 0 or users.max() >= self.n):
            raise ValueError("user index out of range")
        if len(items) and (items.min() < 0 or items.max() >= self.p):
            raise ValueError("item index out of range")
        for name, arr in (("users", users), ("items", items), ("ratings", ratings)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        uptr, uorder = _group_index(users, self.n)
        iptr, iorder = _group_index(items, self.p)
        object.__setattr__(self, "_user_ptr", uptr)
        object.__setattr__(self, "_user_order", uorder)
        object.__setattr__(self, "_item_ptr", iptr)
        object.__setattr__(self, "_item_order", iorder)

    def __len__(self) -> int:
        return len(self.ratings)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.p

    def by_user(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Items rated by user ``i`` and the corresponding ratings."""
        sel = self._user_order[self._user_ptr[i]:self._user_ptr[i + 1]]
        return self.items[sel], self.ratings[sel]

    def by_item(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Users who rated item ``j`` and the corresponding ratings."""
        sel = self._item_order[self._item_ptr[j]:self._item_ptr[j + 1]]
        return self.users[sel], self.ratings[sel]

    def user_counts(self) -> np.ndarray:
        return np.diff(self._user_ptr)

    def item_counts(self) -> np.ndarray:
        return np.diff(self._item_ptr)

    def triples(self) -> Iterator[RatingTriple]:
        """Entries in storage order, using the original file ids."""
        for u, i, r in zip(self.users, self.items, self.ratings):
            yield RatingTriple(int(self.user_ids[u]), int(self.item_ids[i]), float(r))

    def subset(self, index) -> SparseRatings:
        """Ratings at positions ``index``, keeping the same index space."""
        index = np.asarray(index, dtype=np.int64)
        return SparseRatings(
            self.n, self.p,
            self.users[index], self.items[index], self.ratings[index],
            self.user_ids, self.item_ids,
        )

    def to_dense(self, fill: float = np.nan) -> np.ndarray:
        out = np.full((self.n, self.p), fill)
        out[self.users, self.items] = self.ratings
        return out

    @classmethod
    def from_arrays(cls, users, items, ratings, n: int | None = None, p: int | None = None) -> SparseRatings:
        """Build from already-dense 0-based indices (ids equal indices)."""
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        n = int(users.max()) + 1 if n is None else n
        p = int(items.max()) + 1 if p is None else p
        pairs = users * p + items
        if len(np.unique(pairs)) != len(pairs):
            raise ValueError("duplicate (user, item) pairs")
        return cls(n, p, users, items, np.asarray(ratings, dtype=np.float64),
                   np.arange(n), np.arange(p))


@dataclass(frozen=True, eq=False)
class DataSplit:
    train: SparseRatings
    test: SparseRatings
    seed: int
    fraction: float


def _iter_lines(source) -> Iterable[bytes]:
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(source)
    return source


def parse_movielens(source: BinaryIO | bytes) -> SparseRatings:
    """Parse ``user<TAB>item<TAB>rating<TAB>timestamp`` lines.

    Accepts a binary stream or a bytes object. LF and CRLF line endings are
    both accepted; blank lines are skipped and the timestamp is ignored.
    """
    raw_users: list[int] = []
    raw_items: list[int] = []
    values: list[float] = []
    seen: dict[tuple[int, int], int] = {}

    for lineno, raw in enumerate(_iter_lines(source), start=1):
        if isinstance(raw, str):
            raw = raw.encode()
        line = raw.rstrip(b"\r\n")
        if not line.strip():
            continue
        text = line.decode("utf-8", errors="replace")
        fields = text.split("\t")
        if len(fields) != 4:
            raise ParseError(lineno, text, f"expected 4 tab-separated fields, got {len(fields)}")
        try:
            user = int(fields[0])
            item = int(fields[1])
            rating = float(fields[2])
            int(fields[3])
        except ValueError:
            raise ParseError(lineno, text, "non-numeric field") from None
        if user < 1 or item < 1:
            raise ParseError(lineno, text, "ids must be >= 1")
        if not (1.0 <= rating <= 5.0):
            raise ParseError(lineno, text, "rating outside [1, 5]")
        key = (user, item)
        if key in seen:
            raise DuplicateRatingError(lineno, user, item)
        seen[key] = lineno
        raw_users.append(user)
        raw_items.append(item)
        values.append(rating)

    if not values:
        raise EmptyDatasetError("no ratings found in input")

    user_ids, users = np.unique(np.asarray(raw_users, dtype=np.int64), return_inverse=True)
    item_ids, items = np.unique(np.asarray(raw_items, dtype=np.int64), return_inverse=True)
    return SparseRatings(len(user_ids), len(item_ids), users, items,
                         np.asarray(values), user_ids, item_ids)


def load_movielens(path: str | os.PathLike) -> SparseRatings:
    with open(path, "rb") as fh:
        return parse_movielens(fh)


def shuffle_order(size: int, seed: int) -> np.ndarray:
    """Fisher-Yates permutation of ``range(size)``.

    Procedure: ``rng = numpy.random.default_rng(seed)`` (PCG64); draw all swap
    targets at once with ``rng.integers(0, [size, size-1, ..., 2])``; then for
    ``t = 0, 1, ...`` swap position ``size-1-t`` with the t-th target.
    """
    order = np.arange(size, dtype=np.int64)
    if size < 2:
        return order
    rng = np.random.default_rng(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    targets = rng.integers(0, np.arange(size, 1, -1))
    for t, j in enumerate(targets.tolist()):
        i = size - 1 - t
        order[i], order[j] = order[j], order[i]
    return order


def split(ratings: SparseRatings, fraction: float, seed: int) -> DataSplit:
    """Uniform random train/test partition with ``ceil(fraction * N)`` training entries."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    size = len(ratings)
    order = shuffle_order(size, seed)
    n_train = min(size, math.ceil(fraction * size))
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    return DataSplit(ratings.subset(train_idx), ratings.subset(test_idx), seed, fraction)


def predictions(U: np.ndarray, V: np.ndarray, ratings: SparseRatings) -> np.ndarray:
    return np.einsum("ij,ij->i", U[ratings.users], V[ratings.items])


def rmse(state, ratings: SparseRatings) -> float:
    """Root mean squared error of raw (unclipped) predictions ``u_i . v_j``."""
    if len(ratings) == 0:
        raise UndefinedMetricError("RMSE of an empty rating set is undefined")
    resid = ratings.ratings - predictions(state.U, state.V, ratings)
    return math.sqrt(float(resid @ resid) / len(ratings))


def write_movielens(ratings: SparseRatings, path: str | os.PathLike, timestamp: int = 0) -> None:
    """Write ratings back out in ``u.data`` layout with the original ids."""
    with open(path, "w", newline="\n") as fh:
        for t in ratings.triples():
            value = int(t.rating) if float(t.rating).is_integer() else repr(t.rating)
            fh.write(f"{t.user}\t{t.item}\t{value}\t{timestamp}\n")
