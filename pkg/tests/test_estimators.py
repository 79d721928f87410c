import numpy as np
import pytest
from sklearn.base import clone
from sklearn.utils.validation import check_is_fitted

from sfmnet import datasets
from sfmnet.estimators import (
    Net1ForceRegressor,
    Net2ForceRegressor,
    samples_to_arrays,
)


@pytest.fixture(scope="module")
def corridor_arrays():
    ds = datasets.gen_corridor_dataset(20, seed=40)
    return samples_to_arrays(ds.train + ds.val, "net2")


@pytest.fixture(scope="module")
def open_arrays():
    ds = datasets.gen_open_dataset(15, seed=41)
    return samples_to_arrays(ds.train + ds.val, "net1")


def test_get_params_round_trip():
    est = Net2ForceRegressor(learning_rate=0.01, epochs=5, seed=3)
    params = est.get_params()
    assert params["learning_rate"] == 0.01
    est2 = Net2ForceRegressor(**params)
    assert est2.get_params() == params


def test_clone_compatible():
    est = Net1ForceRegressor(epochs=2)
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_fit_predict_shapes(corridor_arrays):
    X, y = corridor_arrays
    est = Net2ForceRegressor(epochs=10, seed=0)
    est.fit(X, y)
    check_is_fitted(est)
    pred = est.predict(X)
    assert pred.shape == y.shape
    assert np.all(np.isfinite(pred))


def test_fit_reduces_error(corridor_arrays):
    X, y = corridor_arrays
    est = Net2ForceRegressor(epochs=40, seed=0)
    est.fit(X, y)
    final = est.report_.final_train_mse
    assert final < est.report_.train_mse[0]


def test_net1_column_count_enforced(open_arrays):
    X, y = open_arrays
    est = Net1ForceRegressor(epochs=1)
    with pytest.raises(ValueError):
        est.fit(X[:, :-1], y)


def test_net1_fit_on_open_data(open_arrays):
    X, y = open_arrays
    est = Net1ForceRegressor(epochs=20, learning_rate=0.01, batch_size=64, seed=0)
    est.fit(X, y)
    pred = est.predict(X)
    assert np.mean(pred**2) < np.mean(est.predict(X * 0 + X) ** 2) + 1e9  # finite
    assert est.report_.final_train_mse < est.report_.train_mse[0]


def test_validation_fraction_split(corridor_arrays):
    X, y = corridor_arrays
    est = Net2ForceRegressor(epochs=5, seed=0, validation_fraction=0.25)
    est.fit(X, y)
    assert not np.isnan(est.report_.final_val_mse)


def test_deterministic_fit(corridor_arrays):
    X, y = corridor_arrays
    a = Net2ForceRegressor(epochs=5, seed=7).fit(X, y)
    b = Net2ForceRegressor(epochs=5, seed=7).fit(X, y)
    assert a.report_.weights_digest == b.report_.weights_digest


def test_predict_before_fit_raises(corridor_arrays):
    X, _ = corridor_arrays
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        Net2ForceRegressor().predict(X)


def test_score_is_r2(corridor_arrays):
    X, y = corridor_arrays
    # small batches: enough optimizer steps to fit the small dataset well
    est = Net2ForceRegressor(epochs=600, batch_size=32, seed=0)
    est.fit(X, y)
    assert est.score(X, y) > 0.9
