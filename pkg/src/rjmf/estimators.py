"""scikit-learn style wrappers around the ALS and annealing solvers.

Both estimators take ``X`` as an ``(n_samples, 2)`` array of raw
``(user_id, item_id)`` pairs and ``y`` as the ratings, so they work with
``clone``, ``GridSearchCV`` and ``cross_val_score``. Users or items not seen
during ``fit`` have no learned vector; their predictions are 0, the prior
mean of ``u . v``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_pairs, check_positive, check_ratings
from .als import als_fit
from .annealer import AnnealerConfig, AnnealSchedule, run_chain
from .data import SparseRatings
from .model import FactorState, HyperParams


class _FactorRegressor(RegressorMixin, BaseEstimator):

    def _index(self, X, y) -> SparseRatings:
        X, y = check_ratings(X, y)
        self.user_ids_, users = np.unique(X[:, 0], return_inverse=True)
        self.item_ids_, items = np.unique(X[:, 1], return_inverse=True)
        self.n_features_in_ = 2
        return SparseRatings(len(self.user_ids_), len(self.item_ids_), users, items, y,
                             self.user_ids_, self.item_ids_)

    def _index_eval(self, X, y) -> SparseRatings | None:
        if X is None:
            return None
        X, y = check_ratings(X, y)
        users, u_ok = self._lookup(self.user_ids_, X[:, 0])
        items, i_ok = self._lookup(self.item_ids_, X[:, 1])
        keep = u_ok & i_ok
        return SparseRatings(len(self.user_ids_), len(self.item_ids_), users[keep], items[keep],
                             y[keep], self.user_ids_, self.item_ids_)

    @staticmethod
    def _lookup(known: np.ndarray, ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pos = np.searchsorted(known, ids)
        pos = np.minimum(pos, len(known) - 1)
        return pos, known[pos] == ids

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "factors_")
        X = check_pairs(X)
        users, u_ok = self._lookup(self.user_ids_, X[:, 0])
        items, i_ok = self._lookup(self.item_ids_, X[:, 1])
        U, V = self.factors_.U, self.factors_.V
        pred = np.einsum("ij,ij->i", U[users], V[items])
        pred[~(u_ok & i_ok)] = 0.0
        return pred

    def rmse(self, X, y) -> float:
        pred = self.predict(X)
        return float(np.sqrt(np.mean((np.asarray(y, dtype=np.float64) - pred) ** 2)))


class ALSFactorizer(_FactorRegressor):
    """Ridge-regularized matrix factorization fitted by alternating least squares.

    Parameters
    ----------
    n_factors : int
        Latent dimension ``k``.
    lambda1, lambda2 : float
        User and item ridge weights.
    max_iter : int
        Cap on full (user + item) iterations.
    tol : float
        Stop when the training loss changes by less than this.
    random_state : int, Generator or None
        Seed for the initial factors.

    Attributes
    ----------
    factors_ : FactorState
    trace_ : AlsTrace
    """

    def __init__(self, n_factors=10, lambda1=30.0, lambda2=30.0, max_iter=100, tol=1e-6,
                 random_state=None):
        self.n_factors = n_factors
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y, X_test=None, y_test=None):
        check_positive("n_factors", self.n_factors)
        check_positive("lambda1", self.lambda1, allow_zero=True)
        check_positive("lambda2", self.lambda2, allow_zero=True)
        train = self._index(X, y)
        test = self._index_eval(X_test, y_test)
        self.factors_, self.trace_ = als_fit(
            train, test, HyperParams(self.lambda1, self.lambda2), int(self.n_factors),
            seed=self.random_state, max_iters=self.max_iter, tol=self.tol)
        self.n_iter_ = len(self.trace_)
        return self


class RJMCMCFactorizer(_FactorRegressor):
    """Matrix factorization whose dimension and ridge weights are chosen during annealing.

    Runs one reversible-jump annealing chain and keeps the lowest training
    loss state it visits. Parameter names follow the experiment config.

    Attributes
    ----------
    factors_ : FactorState
        Lowest-loss state visited.
    final_factors_ : FactorState
        State at the end of the schedule.
    n_factors_ : int
        Latent dimension of ``factors_``.
    hyperparams_ : HyperParams
        Regularization weights at the end of the run.
    trace_ : list of ChainTraceRecord
    """

    def __init__(self, k_max=50, lambda1_init=30.0, lambda2_init=30.0, t0=1.0, cooling=0.995,
                 tmin=1e-3, step_scale=0.05, alpha=0.001, beta1=0.9, beta2=0.999, eps=1e-8,
                 freeze_tol=1e-5, adapt_hyper=True, random_state=None):
        self.k_max = k_max
        self.lambda1_init = lambda1_init
        self.lambda2_init = lambda2_init
        self.t0 = t0
        self.cooling = cooling
        self.tmin = tmin
        self.step_scale = step_scale
        self.alpha = alpha
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.freeze_tol = freeze_tol
        self.adapt_hyper = adapt_hyper
        self.random_state = random_state

    def _config(self) -> AnnealerConfig:
        check_positive("lambda1_init", self.lambda1_init)
        check_positive("lambda2_init", self.lambda2_init)
        return AnnealerConfig(
            k_max=int(self.k_max),
            schedule=AnnealSchedule(self.t0, self.cooling, self.tmin),
            step_scale=self.step_scale,
            lambda1_init=self.lambda1_init, lambda2_init=self.lambda2_init,
            alpha=self.alpha, beta1=self.beta1, beta2=self.beta2, eps=self.eps,
            freeze_tol=self.freeze_tol, adapt_hyper=self.adapt_hyper,
        )

    def fit(self, X, y, X_test=None, y_test=None):
        cfg = self._config()
        train = self._index(X, y)
        test = self._index_eval(X_test, y_test)
        res = run_chain(cfg, train, test, seed=self.random_state)
        self.factors_: FactorState = res.best_state
        self.final_factors_ = res.final_state
        self.n_factors_ = res.best_state.k
        self.hyperparams_ = res.hyperparams
        self.hyper_frozen_ = res.adam.frozen
        self.trace_ = res.trace
        self.best_iteration_ = res.best_iteration
        return self
