import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import KFold, cross_val_score

from rjmf.estimators import ALSFactorizer, RJMCMCFactorizer
from rjmf.synthetic import gen_synthetic


def xy(data):
    X = np.column_stack([data.user_ids[data.users], data.item_ids[data.items]])
    return X, data.ratings


@pytest.fixture
def synthetic_xy():
    return xy(gen_synthetic(15, 10, 1, 0.05, 0.9, seed=2))


def test_get_params_and_clone():
    est = ALSFactorizer(n_factors=3, lambda1=0.5, random_state=7)
    params = est.get_params()
    assert params["n_factors"] == 3 and params["lambda1"] == 0.5 and params["random_state"] == 7
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    rj = RJMCMCFactorizer(k_max=4, t0=2.0)
    assert clone(rj).get_params()["k_max"] == 4


def test_als_fit_predict(synthetic_xy):
    X, y = synthetic_xy
    est = ALSFactorizer(n_factors=1, lambda1=1e-4, lambda2=1e-4, random_state=0).fit(X, y)
    assert est.factors_.k == 1 and est.n_iter_ >= 1
    assert est.rmse(X, y) < 0.2
    assert est.score(X, y) > 0.9


def test_cross_val_score(synthetic_xy):
    X, y = synthetic_xy
    est = ALSFactorizer(n_factors=1, lambda1=1e-3, lambda2=1e-3, random_state=0)
    scores = cross_val_score(est, X, y, cv=KFold(3, shuffle=True, random_state=0),
                             scoring="neg_root_mean_squared_error")
    assert scores.shape == (3,) and np.all(np.isfinite(scores))


def test_unknown_ids_predict_zero(synthetic_xy):
    X, y = synthetic_xy
    est = ALSFactorizer(n_factors=1, random_state=0).fit(X, y)
    pred = est.predict(np.array([[999, X[0, 1]], [X[0, 0], 999], [X[0, 0], X[0, 1]]]))
    assert pred[0] == 0.0 and pred[1] == 0.0 and pred[2] != 0.0


def test_eval_set_records_test_rmse(synthetic_xy):
    X, y = synthetic_xy
    est = ALSFactorizer(n_factors=1, lambda1=1e-3, lambda2=1e-3, random_state=0)
    est.fit(X[:100], y[:100], X_test=X[100:], y_test=y[100:])
    assert np.isfinite(est.trace_.records[-1].test_rmse)


def test_input_validation(synthetic_xy):
    X, y = synthetic_xy
    with pytest.raises(NotFittedError):
        ALSFactorizer().predict(X)
    with pytest.raises(ValueError):
        ALSFactorizer().fit(X[:, :1], y)
    with pytest.raises(ValueError):
        ALSFactorizer().fit(np.vstack([X[:1], X[:1]]), y[:2])
    with pytest.raises(ValueError):
        ALSFactorizer().fit(X + 0.5, y)
    with pytest.raises(ValueError):
        ALSFactorizer(lambda1=-1.0).fit(X, y)
    with pytest.raises(ValueError):
        RJMCMCFactorizer(lambda1_init=0.0).fit(X, y)


def test_rjmcmc_estimator(synthetic_xy):
    X, y = synthetic_xy
    est = RJMCMCFactorizer(k_max=4, cooling=0.9, tmin=0.01, random_state=3).fit(X, y)
    assert 1 <= est.n_factors_ <= 4
    assert 0 <= est.best_iteration_ <= len(est.trace_)
    assert est.predict(X).shape == y.shape
    again = RJMCMCFactorizer(k_max=4, cooling=0.9, tmin=0.01, random_state=3).fit(X, y)
    assert np.array_equal(est.predict(X), again.predict(X))
