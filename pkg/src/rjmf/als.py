"""Alternating ridge least squares baseline.

Each half-step minimizes the regularized loss exactly in one factor matrix,
so the loss never increases from one full iteration to the next.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .data import SparseRatings, rmse
from .exceptions import SingularSystemError
from .model import FactorState, HyperParams, init_factors, regularized_loss

_logger = logging.getLogger(__name__)


@dataclass
class AlsRecord:
    iteration: int
    train_loss: float
    test_rmse: float


@dataclass
class AlsTrace:
    records: list[AlsRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.train_loss for r in self.records])

    def __len__(self):
        return len(self.records)


def _solve_rows(fixed: np.ndarray, ptr: np.ndarray, order: np.ndarray, cols: np.ndarray,
                vals: np.ndarray, n_rows: int, reg: float, side: str) -> np.ndarray:
    k = fixed.shape[1]
    out = np.zeros((n_rows, k))
    ridge = reg * np.eye(k)
    for r in range(n_rows):
        sel = order[ptr[r]:ptr[r + 1]]
        if len(sel) == 0:
            continue
        F = fixed[cols[sel]]
        gram = F.T @ F + ridge
        try:
            factor = cho_factor(gram, check_finite=False)
        except LinAlgError:
            raise SingularSystemError(side, r) from None
        if not np.all(np.diag(factor[0]) > 0):
            raise SingularSystemError(side, r)
        out[r] = cho_solve(factor, F.T @ vals[sel], check_finite=False)
    return out


def update_users(state: FactorState, hp: HyperParams, train: SparseRatings) -> FactorState:
    """Exact minimizer of the regularized loss over U with V fixed.

    The loss averages squared errors over all ``|kappa|`` training ratings but
    leaves the penalty unscaled, so each row solves
    ``(V_i^T V_i + |kappa| lambda1 I) u_i = V_i^T m_i``. Users without training
    ratings get ``u_i = 0``.
    """
    U = _solve_rows(state.V, train._user_ptr, train._user_order, train.items,
                    train.ratings, state.n, len(train) * hp.lambda1, "user")
    return FactorState(U, state.V)


def update_items(state: FactorState, hp: HyperParams, train: SparseRatings) -> FactorState:
    """Item-side counterpart of :func:`update_users`, U fixed and ``lambda2``."""
    V = _solve_rows(state.U, train._item_ptr, train._item_order, train.users,
                    train.ratings, state.p, len(train) * hp.lambda2, "item")
    return FactorState(state.U, V)


def als_fit(train: SparseRatings, test: SparseRatings | None, hp: HyperParams, k: int,
            seed=None, max_iters: int = 100, tol: float = 1e-6,
            init: FactorState | None = None) -> tuple[FactorState, AlsTrace]:
    """Alternate user and item solves until the training loss settles.

    Stops once successive training losses differ by less than ``tol`` or
    after ``max_iters`` full iterations. Test RMSE is recorded but never used
    for stopping.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    state = init if init is not None else init_factors(train.n, train.p, k, seed)
    trace = AlsTrace()
    prev, _ = regularized_loss(state, hp, train)
    for it in range(1, max_iters + 1):
        state = update_items(update_users(state, hp, train), hp, train)
        loss, _ = regularized_loss(state, hp, train)
        test_rmse = rmse(state, test) if test is not None and len(test) else math.nan
        trace.records.append(AlsRecord(it, loss, test_rmse))
        _logger.debug("als iter %d loss %.6g test rmse %.6g", it, loss, test_rmse)
        if abs(prev - loss) < tol:
            trace.converged = True
            break
        prev = loss
    return state, trace
